#include "rankcom/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rankcom/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rankcom {

double edge_score(int i, int j, const Model& m) {
  const double qi = m.posterior.Q[i], qj = m.posterior.Q[j];
  return qi * qj * expected_count_s(i, j, m.ranking) +
         (1.0 - qi) * (1.0 - qj) * expected_count_m(i, j, m.community) +
         (qi * (1.0 - qj) + (1.0 - qi) * qj) * m.delta0;
}

std::optional<double> auc(const std::vector<double>& scores, const std::vector<char>& labels) {
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (char l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over tied groups
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

Mat zero_pad(const Mat& m, int k) {
  if (static_cast<int>(m.cols()) == k) return m;
  Mat out = Mat::Zero(m.rows(), k);
  out.leftCols(m.cols()) = m;
  return out;
}

// mean over nodes of cos(inferred row under permutation, true row)
double mean_row_cosine(const Mat& inf, const Mat& tru, const std::vector<int>& perm) {
  const int n = static_cast<int>(inf.rows());
  const int k = static_cast<int>(inf.cols());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double dot = 0.0, ni = 0.0, nt = 0.0;
    for (int c = 0; c < k; ++c) {
      const double a = inf(i, perm[static_cast<std::size_t>(c)]);
      const double b = tru(i, c);
      dot += a * b;
      ni += a * a;
      nt += b * b;
    }
    if (ni == 0.0 && nt == 0.0) {
      total += 1.0;
    } else if (ni == 0.0 || nt == 0.0) {
      total += 0.0;
    } else {
      total += dot / std::sqrt(ni * nt);
    }
  }
  return total / n;
}

}  // namespace

double membership_similarity(const Mat& u_inf, const Mat& v_inf, const Mat& u_true,
                             const Mat& v_true) {
  const int k = static_cast<int>(std::max(u_inf.cols(), u_true.cols()));
  const Mat ui = zero_pad(u_inf, k), vi = zero_pad(v_inf, k);
  const Mat ut = zero_pad(u_true, k), vt = zero_pad(v_true, k);

  std::vector<int> best(static_cast<std::size_t>(k));
  std::iota(best.begin(), best.end(), 0);
  if (k <= 6) {
    std::vector<int> perm = best;
    double best_value = -1.0;
    do {
      const double value = mean_row_cosine(ui, ut, perm) + mean_row_cosine(vi, vt, perm);
      if (value > best_value) {
        best_value = value;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // greedy column matching on column cosine
    Mat affinity = Mat::Zero(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const double na = ui.col(a).norm() * ut.col(b).norm();
        const double nb = vi.col(a).norm() * vt.col(b).norm();
        affinity(a, b) = (na > 0.0 ? ui.col(a).dot(ut.col(b)) / na : 0.0) +
                         (nb > 0.0 ? vi.col(a).dot(vt.col(b)) / nb : 0.0);
      }
    std::vector<bool> used_a(static_cast<std::size_t>(k), false), used_b(used_a);
    for (int step = 0; step < k; ++step) {
      int best_a = -1, best_b = -1;
      double best_val = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          if (!used_a[static_cast<std::size_t>(a)] && !used_b[static_cast<std::size_t>(b)] &&
              affinity(a, b) > best_val) {
            best_val = affinity(a, b);
            best_a = a;
            best_b = b;
          }
      best[static_cast<std::size_t>(best_b)] = best_a;
      used_a[static_cast<std::size_t>(best_a)] = true;
      used_b[static_cast<std::size_t>(best_b)] = true;
    }
  }
  return 0.5 * (mean_row_cosine(ui, ut, best) + mean_row_cosine(vi, vt, best));
}

std::optional<double> score_correlation(const Vec& inferred, const Vec& truth,
                                        const std::vector<int>* subset) {
  std::vector<int> idx;
  if (subset != nullptr) {
    idx = *subset;
  } else {
    idx.resize(static_cast<std::size_t>(inferred.size()));
    std::iota(idx.begin(), idx.end(), 0);
  }
  const std::size_t n = idx.size();
  if (n < 2) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (int i : idx) {
    ma += inferred[i];
    mb += truth[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cab = 0.0, caa = 0.0, cbb = 0.0;
  for (int i : idx) {
    const double da = inferred[i] - ma, db = truth[i] - mb;
    cab += da * db;
    caa += da * da;
    cbb += db * db;
  }
  if (caa == 0.0 || cbb == 0.0) return std::nullopt;
  return cab / std::sqrt(caa * cbb);
}

namespace {

FoldMetrics evaluate_fold(const DirectedWeightedGraph& g, const EntryMask& mask,
                          const FitResult& fit, const GroundTruth* truth, int fold, int K,
                          double lambda, double threshold) {
  FoldMetrics fm;
  fm.fold = fold;
  fm.K = K;
  fm.lambda = lambda;
  fm.converged = fit.converged;
  fm.final_elbo = fit.elbo_trace.empty() ? 0.0 : fit.elbo_trace.back();

  // test AUC over hidden entries; positives are entries with A >= 1
  const auto pairs = mask.pairs();
  std::vector<double> scores;
  std::vector<char> labels;
  scores.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    scores.push_back(edge_score(i, j, fit.model));
    labels.push_back(g.weight(i, j) >= 1 ? 1 : 0);
  }
  fm.edge_auc = auc(scores, labels);
  if (!fm.edge_auc.has_value())
    std::fprintf(stderr, "warning: fold %d: single-class test set, edge AUC skipped\n", fold);

  if (truth != nullptr) {
    const int n = g.n_nodes();
    std::vector<double> q(static_cast<std::size_t>(n));
    std::vector<char> sig(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      q[static_cast<std::size_t>(i)] = fit.model.posterior.Q[i];
      sig[static_cast<std::size_t>(i)] = truth->sigma[i] == 1 ? 1 : 0;
    }
    if (auto raw = auc(q, sig); raw.has_value()) {
      // type labels are identifiable only up to the model's semantics;
      // report the better orientation and flag the flip
      fm.type_auc = std::max(*raw, 1.0 - *raw);
      fm.type_auc_flipped = 1.0 - *raw > *raw;
    }
    fm.cs = membership_similarity(fit.model.community.u, fit.model.community.v, truth->u, truth->v);
    fm.pc_all = score_correlation(fit.model.ranking.s, truth->s);
    std::vector<int> type1;
    for (int i = 0; i < n; ++i)
      if (fit.model.posterior.Q[i] >= threshold) type1.push_back(i);
    fm.pc_type1 = score_correlation(fit.model.ranking.s, truth->s, &type1);
  }
  return fm;
}

}  // namespace

CVReport cross_validate(const DirectedWeightedGraph& g, const CVOptions& opts,
                        const GroundTruth* truth) {
  if (opts.k_grid.empty() || opts.lambda_grid.empty())
    throw std::invalid_argument("cross_validate: empty grid");
  const std::vector<EntryMask> folds = make_folds(g, opts.k_folds, opts.seed);

  struct Job {
    int fold;
    int ki;
    int li;
  };
  std::vector<Job> jobs;
  for (int f = 0; f < opts.k_folds; ++f)
    for (int ki = 0; ki < static_cast<int>(opts.k_grid.size()); ++ki)
      for (int li = 0; li < static_cast<int>(opts.lambda_grid.size()); ++li)
        jobs.push_back({f, ki, li});

  CVReport report;
  report.rows.resize(jobs.size());
  std::vector<std::uint64_t> leaks(jobs.size(), 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int jx = 0; jx < static_cast<int>(jobs.size()); ++jx) {
    const Job job = jobs[static_cast<std::size_t>(jx)];
    const double lambda = opts.lambda_grid[static_cast<std::size_t>(job.li)];
    HyperParams hp = opts.hp;
    hp.K = opts.k_grid[static_cast<std::size_t>(job.ki)];
    hp.reg.lambda_u = lambda;
    hp.reg.lambda_v = lambda;
    hp.reg.lambda_w = 10.0 * lambda;
    hp.seed = rng::stream_seed(opts.seed, "cv-fit", static_cast<std::uint64_t>(jx));

    const auto start = std::chrono::steady_clock::now();
    FitResult fit_result = fit(g, &folds[static_cast<std::size_t>(job.fold)], hp, opts.pin);
    const auto stop = std::chrono::steady_clock::now();

    FoldMetrics fm = evaluate_fold(g, folds[static_cast<std::size_t>(job.fold)], fit_result, truth,
                                   job.fold, hp.K, lambda, hp.decision_threshold);
    fm.runtime_sec = std::chrono::duration<double>(stop - start).count();
    report.rows[static_cast<std::size_t>(jx)] = fm;
    leaks[static_cast<std::size_t>(jx)] = fit_result.masked_reads;
  }
  for (std::uint64_t l : leaks) report.masked_reads += l;

  // aggregate and select (ties: smaller K, then smaller lambda)
  double best_auc = -1.0;
  for (int ki = 0; ki < static_cast<int>(opts.k_grid.size()); ++ki)
    for (int li = 0; li < static_cast<int>(opts.lambda_grid.size()); ++li) {
      std::vector<std::optional<double>> aucs;
      for (const auto& row : report.rows)
        if (row.K == opts.k_grid[static_cast<std::size_t>(ki)] &&
            row.lambda == opts.lambda_grid[static_cast<std::size_t>(li)])
          aucs.push_back(row.edge_auc);
      const Aggregate agg = aggregate(aucs);
      GridCell cell;
      cell.K = opts.k_grid[static_cast<std::size_t>(ki)];
      cell.lambda = opts.lambda_grid[static_cast<std::size_t>(li)];
      cell.mean_edge_auc = agg.mean;
      cell.std_edge_auc = agg.stddev;
      cell.n_folds = agg.count;
      report.grid.push_back(cell);
      if (agg.count > 0 && agg.mean > best_auc) {
        best_auc = agg.mean;
        report.selected_K = cell.K;
        report.selected_lambda = cell.lambda;
      }
    }
  return report;
}

SweepTable benchmark_sweep(const SweepOptions& opts) {
  SweepTable table;
  for (int mi = 0; mi < static_cast<int>(opts.mu_grid.size()); ++mi) {
    const double mu = opts.mu_grid[static_cast<std::size_t>(mi)];
    for (int sample = 0; sample < opts.n_samples; ++sample) {
      const std::uint64_t sample_seed =
          rng::stream_seed(opts.seed, "sweep-sample",
                           static_cast<std::uint64_t>(mi) * 1000 + static_cast<std::uint64_t>(sample));
      Synthetic synth = make_synthetic(opts.spec, mu, sample_seed);

      struct ModelKind {
        const char* name;
        QPin pin;
        bool enabled;
      };
      const ModelKind kinds[] = {{"xor", QPin::kNone, opts.run_xor},
                                 {"mt", QPin::kAllZero, opts.run_mt},
                                 {"sr", QPin::kAllOne, opts.run_sr}};
      for (const auto& kind : kinds) {
        if (!kind.enabled) continue;
        CVOptions cv;
        cv.k_grid = {opts.spec.k};
        cv.lambda_grid = {0.0};
        cv.k_folds = opts.k_folds;
        cv.seed = sample_seed;  // matched folds across the three models
        cv.hp = opts.hp;
        cv.hp.beta = opts.spec.beta;
        cv.pin = kind.pin;
        const CVReport report = cross_validate(synth.graph, cv, &synth.truth);
        for (const auto& row : report.rows)
          table.rows.push_back({mu, sample, kind.name, row});
      }
    }
  }
  return table;
}

Aggregate aggregate(const std::vector<std::optional<double>>& values) {
  Aggregate agg;
  double sum = 0.0;
  for (const auto& v : values)
    if (v.has_value()) {
      sum += *v;
      ++agg.count;
    }
  if (agg.count == 0) return agg;
  agg.mean = sum / agg.count;
  double var = 0.0;
  for (const auto& v : values)
    if (v.has_value()) var += (*v - agg.mean) * (*v - agg.mean);
  agg.stddev = agg.count > 1 ? std::sqrt(var / (agg.count - 1)) : 0.0;
  return agg;
}

}  // namespace rankcom
