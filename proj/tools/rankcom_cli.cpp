// Command-line surface: generate, fit, cv, sweep, ising-check.
// Human-readable progress goes to stderr; machine output to files and stdout.
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rankcom/em.hpp"
#include "rankcom/evaluation.hpp"
#include "rankcom/generative.hpp"
#include "rankcom/graph.hpp"
#include "rankcom/ising.hpp"
#include "rankcom/parallel.hpp"
#include "rankcom/serialize.hpp"

using namespace rankcom;

namespace {

// "1,2,3" or "1..5"
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) out.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// "0,0.1,0.5" or "0..1..0.1" (lo..hi..step)
std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const double lo = std::stod(text.substr(0, dots));
    const auto rest = text.substr(dots + 2);
    const auto dots2 = rest.find("..");
    if (dots2 == std::string::npos) throw CLI::ValidationError("range needs lo..hi..step");
    const double hi = std::stod(rest.substr(0, dots2));
    const double step = std::stod(rest.substr(dots2 + 2));
    if (step <= 0.0) throw CLI::ValidationError("range step must be positive");
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(std::min(v, hi));
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// "mean:std:weight,mean:std:weight,..."
LeagueSpec parse_leagues(const std::string& text) {
  std::vector<double> means, stds, weights;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) {
      const auto c1 = tok.find(':');
      const auto c2 = tok.find(':', c1 == std::string::npos ? c1 : c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos)
        throw CLI::ValidationError("league component needs mean:std:weight");
      means.push_back(std::stod(tok.substr(0, c1)));
      stds.push_back(std::stod(tok.substr(c1 + 1, c2 - c1 - 1)));
      weights.push_back(std::stod(tok.substr(c2 + 1)));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  LeagueSpec l;
  l.means = Eigen::Map<Vec>(means.data(), static_cast<Eigen::Index>(means.size()));
  l.stds = Eigen::Map<Vec>(stds.data(), static_cast<Eigen::Index>(stds.size()));
  l.weights = Eigen::Map<Vec>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return l;
}

struct FitFlags {
  int K = 3;
  double beta = 5.0;
  double lambda = 0.0;
  double tol = 1e-6;
  int max_iter = 500;
  int restarts = 5;
  double threshold = 0.5;
  std::string schedule = "sequential";
  int score_sweeps = 1;
  bool no_guard = false;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_k = true, bool with_lambda = true) {
  if (with_k)
    cmd->add_option("-K,--K", f.K, "number of communities")->check(CLI::PositiveNumber);
  cmd->add_option("--beta", f.beta, "inverse temperature of the hierarchy")
      ->check(CLI::PositiveNumber);
  if (with_lambda)
    cmd->add_option("--lambda", f.lambda,
                    "membership prior rate; couples lambda_u = lambda_v = lambda, lambda_w = 10*lambda")
        ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", f.tol, "relative objective tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter)->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", f.restarts, "random restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", f.threshold, "hard type decision threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--schedule", f.schedule, "type-posterior update schedule")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  cmd->add_option("--score-sweeps", f.score_sweeps, "score sweeps per M-step")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-guard", f.no_guard, "disable the score monotonicity guard");
}

HyperParams to_hp(const FitFlags& f, std::uint64_t seed) {
  HyperParams hp;
  hp.K = f.K;
  hp.beta = f.beta;
  hp.reg = {f.lambda, f.lambda, 10.0 * f.lambda};
  hp.tol = f.tol;
  hp.max_iter = f.max_iter;
  hp.n_restarts = f.restarts;
  hp.seed = seed;
  hp.decision_threshold = f.threshold;
  hp.schedule = f.schedule == "parallel" ? QSchedule::kParallel : QSchedule::kSequential;
  hp.score_sweeps = f.score_sweeps;
  hp.monotone_guard = !f.no_guard;
  return hp;
}

struct GenerateFlags {
  std::string preset;
  std::optional<int> n, k;
  std::optional<double> mu_opt;
  std::optional<double> avg_degree, beta, delta0, w_ratio, dirichlet_alpha;
  std::string leagues, membership = "hard";
  std::string out_dir;
};

int cmd_generate(const GenerateFlags& gf, std::uint64_t seed) {
  SyntheticSpec spec =
      gf.preset.empty() ? SyntheticSpec::paper_synthetic() : SyntheticSpec::preset(gf.preset);
  if (gf.n) spec.n = *gf.n;
  if (gf.k) spec.k = *gf.k;
  if (gf.avg_degree) spec.avg_degree = *gf.avg_degree;
  if (gf.beta) spec.beta = *gf.beta;
  if (gf.delta0) spec.delta0 = *gf.delta0;
  if (!gf.leagues.empty()) spec.leagues = parse_leagues(gf.leagues);
  if (gf.w_ratio) spec.gt_opts.w_offdiag_ratio = *gf.w_ratio;
  if (gf.membership == "dirichlet") spec.gt_opts.rule = MembershipRule::kDirichlet;
  if (gf.dirichlet_alpha) spec.gt_opts.dirichlet_alpha = *gf.dirichlet_alpha;
  const double mu = gf.mu_opt.value_or(0.5);

  std::fprintf(stderr, "generating N=%d K=%d mu=%g <k>=%g ...\n", spec.n, spec.k, mu,
               spec.avg_degree);
  const Synthetic synth = make_synthetic(spec, mu, seed);
  std::filesystem::create_directories(gf.out_dir);
  save_edge_list(synth.graph, gf.out_dir + "/network.tsv");
  save_ground_truth(gf.out_dir, synth.truth);
  const double realized = degree_stats(synth.graph).mean_degree;
  std::fprintf(stderr, "wrote %s/network.tsv (%zu entries)\n", gf.out_dir.c_str(),
               synth.graph.n_entries());
  std::printf("%s\n", format_double(realized).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coexisting community/hierarchy network model: generation, EM fitting, evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; command-line flags take precedence");

  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--seed", seed, "master seed; all randomness derives from it")
      ->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = hardware default)");

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "sample a synthetic network with ground truth");
  GenerateFlags gf;
  gen->add_option("--preset", gf.preset, "paper-synthetic | paper-synthetic-small")
      ->check(CLI::IsMember({"paper-synthetic", "paper-synthetic-small"}));
  gen->add_option("--n", gf.n, "nodes");
  gen->add_option("--k", gf.k, "planted communities");
  gen->add_option("--mu", gf.mu_opt, "type prior: expected ranking-driven fraction")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--avg-degree", gf.avg_degree);
  gen->add_option("--beta", gf.beta);
  gen->add_option("--delta0", gf.delta0);
  gen->add_option("--leagues", gf.leagues, "mean:std:weight,...");
  gen->add_option("--membership", gf.membership)->check(CLI::IsMember({"hard", "dirichlet"}));
  gen->add_option("--dirichlet-alpha", gf.dirichlet_alpha);
  gen->add_option("--w-offdiag-ratio", gf.w_ratio);
  gen->add_option("--out", gf.out_dir, "output directory")->required();

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "EM fit; exit 0 on convergence, 2 otherwise");
  std::string fit_graph, fit_out, fit_pin, fit_mask;
  FitFlags ff;
  fit_cmd->add_option("graph", fit_graph, "edge list")->required();
  fit_cmd->add_option("--out", fit_out, "result directory")->required();
  fit_cmd->add_option("--pin", fit_pin, "mt: community-only (Q=0); sr: ranking-only (Q=1)")
      ->check(CLI::IsMember({"mt", "sr"}));
  fit_cmd->add_option("--mask", fit_mask, "JSON mask of hidden entries to exclude from training");
  add_fit_flags(fit_cmd, ff);

  // ---- cv ----
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation with (K, lambda) grid search");
  std::string cv_graph, cv_out = "report", cv_truth, cv_k = "3", cv_lambda = "0,0.1,0.5,1",
              cv_pin, cv_folds_out;
  int cv_folds = 5;
  FitFlags cvff;
  cv_cmd->add_option("graph", cv_graph)->required();
  cv_cmd->add_option("--K", cv_k, "grid, e.g. 1..5 or 2,3,4");
  cv_cmd->add_option("--lambda", cv_lambda, "grid, e.g. 0,0.1,0.5");
  cv_cmd->add_option("--folds", cv_folds)->check(CLI::Range(2, 1000000));
  cv_cmd->add_option("--out", cv_out, "prefix for <out>.json and <out>.csv");
  cv_cmd->add_option("--truth", cv_truth, "ground-truth directory for recovery metrics");
  cv_cmd->add_option("--pin", cv_pin)->check(CLI::IsMember({"mt", "sr"}));
  cv_cmd->add_option("--dump-folds", cv_folds_out, "write fold masks to <prefix><i>.json");
  add_fit_flags(cv_cmd, cvff, /*with_k=*/false, /*with_lambda=*/false);

  // ---- sweep ----
  auto* sweep_cmd =
      app.add_subcommand("sweep", "synthetic benchmark over a mu grid, vs pinned baselines");
  std::string sw_mu = "0..1..0.1", sw_out = "figure", sw_models = "xor,mt,sr", sw_preset =
      "paper-synthetic-small";
  int sw_samples = 5, sw_folds = 5;
  std::optional<int> sw_n;
  FitFlags swff;
  sweep_cmd->add_option("--preset", sw_preset)
      ->check(CLI::IsMember({"paper-synthetic", "paper-synthetic-small"}));
  sweep_cmd->add_option("--n", sw_n, "override preset size");
  sweep_cmd->add_option("--mu", sw_mu, "grid, e.g. 0..1..0.1 or 0,0.5,1");
  sweep_cmd->add_option("--samples", sw_samples)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--folds", sw_folds)->check(CLI::Range(2, 1000000));
  sweep_cmd->add_option("--models", sw_models, "subset of xor,mt,sr");
  sweep_cmd->add_option("--out", sw_out, "prefix for <out>.csv and <out>_summary.json");
  add_fit_flags(sweep_cmd, swff, /*with_k=*/false);

  // ---- ising-check ----
  auto* ising_cmd = app.add_subcommand(
      "ising-check", "spin-model diagnostics of a fitted model (enumeration, N <= 20)");
  std::string ic_graph, ic_theta, ic_out = "ising.json", ic_fields;
  ising_cmd->add_option("graph", ic_graph)->required();
  ising_cmd->add_option("theta_dir", ic_theta, "directory written by fit")->required();
  ising_cmd->add_option("--out", ic_out);
  ising_cmd->add_option("--fields", ic_fields, "also write <prefix>J.csv and <prefix>h.csv");

  CLI11_PARSE(app, argc, argv);
  par::set_threads(threads);

  try {
    if (gen->parsed()) return cmd_generate(gf, seed);

    if (fit_cmd->parsed()) {
      const auto g = load_edge_list(fit_graph);
      EntryMask mask;
      const bool masked = !fit_mask.empty();
      if (masked) mask = EntryMask::load_json(fit_mask, g.n_nodes());
      QPin pin = QPin::kNone;
      if (fit_pin == "mt") pin = QPin::kAllZero;
      if (fit_pin == "sr") pin = QPin::kAllOne;
      const HyperParams hp = to_hp(ff, seed);
      std::fprintf(stderr, "fitting N=%d E=%zu K=%d restarts=%d ...\n", g.n_nodes(),
                   g.n_entries(), hp.K, hp.n_restarts);
      const FitResult result = fit(g, masked ? &mask : nullptr, hp, pin);
      save_fit(fit_out, result, g.labels(), hp.decision_threshold);
      std::fprintf(stderr, "%s after %d iterations, objective %.6f (restart %d)\n",
                   result.converged ? "converged" : "max-iter stop", result.iterations,
                   result.elbo_trace.empty() ? 0.0 : result.elbo_trace.back(),
                   result.best_restart);
      return result.converged ? 0 : 2;
    }

    if (cv_cmd->parsed()) {
      const auto g = load_edge_list(cv_graph);
      CVOptions opts;
      opts.k_grid = parse_int_list(cv_k);
      opts.lambda_grid = parse_double_list(cv_lambda);
      opts.k_folds = cv_folds;
      opts.seed = seed;
      opts.hp = to_hp(cvff, seed);
      if (cv_pin == "mt") opts.pin = QPin::kAllZero;
      if (cv_pin == "sr") opts.pin = QPin::kAllOne;
      GroundTruth truth;
      const bool with_truth = !cv_truth.empty();
      if (with_truth) truth = load_ground_truth(cv_truth);
      if (!cv_folds_out.empty()) {
        const auto folds = make_folds(g, cv_folds, seed);
        for (std::size_t f = 0; f < folds.size(); ++f)
          folds[f].save_json(cv_folds_out + std::to_string(f) + ".json");
      }
      const CVReport report = cross_validate(g, opts, with_truth ? &truth : nullptr);
      save_cv_report_json(cv_out + ".json", report);
      save_cv_report_csv(cv_out + ".csv", report);
      std::fprintf(stderr, "selected K=%d lambda=%g (%zu fits)\n", report.selected_K,
                   report.selected_lambda, report.rows.size());
      std::printf("%d %s\n", report.selected_K, format_double(report.selected_lambda).c_str());
      return 0;
    }

    if (sweep_cmd->parsed()) {
      SweepOptions opts;
      opts.mu_grid = parse_double_list(sw_mu);
      opts.n_samples = sw_samples;
      opts.spec = SyntheticSpec::preset(sw_preset);
      if (sw_n) opts.spec.n = *sw_n;
      opts.k_folds = sw_folds;
      opts.seed = seed;
      opts.hp = to_hp(swff, seed);
      opts.run_xor = sw_models.find("xor") != std::string::npos;
      opts.run_mt = sw_models.find("mt") != std::string::npos;
      opts.run_sr = sw_models.find("sr") != std::string::npos;
      std::fprintf(stderr, "sweep: %zu mu values x %d samples x %d folds\n",
                   opts.mu_grid.size(), opts.n_samples, opts.k_folds);
      const SweepTable table = benchmark_sweep(opts);
      save_sweep_csv(sw_out + ".csv", table);
      save_sweep_summary_json(sw_out + "_summary.json", table);
      std::fprintf(stderr, "wrote %s.csv (%zu rows)\n", sw_out.c_str(), table.rows.size());
      return 0;
    }

    if (ising_cmd->parsed()) {
      const auto g = load_edge_list(ic_graph);
      if (g.n_nodes() > 20) {
        std::fprintf(stderr, "error: ising-check enumerates 2^N configurations; N=%d > 20\n",
                     g.n_nodes());
        return 1;
      }
      const Model m = load_fit(ic_theta);
      if (m.n() != g.n_nodes()) {
        std::fprintf(stderr, "error: fitted model has %d nodes, graph has %d\n", m.n(),
                     g.n_nodes());
        return 1;
      }
      const IsingFields fields = compute_fields(g, m);
      if (!ic_fields.empty()) {
        write_matrix_csv(ic_fields + "J.csv", fields.J);
        Mat h_col(g.n_nodes(), 1);
        h_col.col(0) = fields.h;
        write_matrix_csv(ic_fields + "h.csv", h_col);
      }
      const Vec residual = self_consistency_residual(fields, m.posterior.Q);
      const ExactPosterior exact = exact_posterior(g, m);
      GraphView view(g);
      const double bound = elbo(view, m, {});
      nlohmann::json out{{"max_residual", residual.cwiseAbs().maxCoeff()},
                         {"log_evidence", exact.log_evidence},
                         {"elbo", bound},
                         {"jensen_gap", exact.log_evidence - bound},
                         {"marginals", nlohmann::json::array()}};
      for (int i = 0; i < g.n_nodes(); ++i) out["marginals"].push_back(exact.marginals[i]);
      std::ofstream f(ic_out);
      if (!f) throw std::runtime_error("cannot write: " + ic_out);
      f << out.dump(2) << '\n';
      std::printf("%s %s\n", format_double(residual.cwiseAbs().maxCoeff()).c_str(),
                  format_double(exact.log_evidence - bound).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
