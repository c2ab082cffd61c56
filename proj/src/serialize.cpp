#include "rankcom/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rankcom {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  return out;
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json ivec_to_json(const Eigen::VectorXi& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Mat& m,
                      const std::vector<std::string>* row_labels) {
  auto out = open_out(path);
  out << "node";
  for (Eigen::Index k = 0; k < m.cols(); ++k) out << ",k" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (row_labels != nullptr) {
      out << (*row_labels)[static_cast<std::size_t>(i)];
    } else {
      out << i;
    }
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << ',' << format_double(m(i, k));
    out << '\n';
  }
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  const std::size_t cols = csv_fields(line).size() - 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv_fields(line);
    if (fields.size() != cols + 1) throw std::runtime_error("ragged csv row in " + path);
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(std::stod(fields[c]));
    rows.push_back(std::move(row));
  }
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return m;
}

void save_fit(const std::string& dir, const FitResult& fit, const std::vector<std::string>& labels,
              double decision_threshold) {
  fs::create_directories(dir);
  const Model& m = fit.model;

  json theta{{"c", m.ranking.c},
             {"delta0", m.delta0},
             {"mu", m.posterior.mu},
             {"beta", m.ranking.beta},
             {"K", m.community.k()},
             {"n_nodes", m.n()},
             {"converged", fit.converged},
             {"best_restart", fit.best_restart},
             {"iterations", fit.iterations},
             {"final_elbo", fit.elbo_trace.empty() ? 0.0 : fit.elbo_trace.back()},
             {"masked_reads", fit.masked_reads}};
  open_out(dir + "/theta.json") << theta.dump(2) << '\n';

  write_matrix_csv(dir + "/u.csv", m.community.u, &labels);
  write_matrix_csv(dir + "/v.csv", m.community.v, &labels);
  write_matrix_csv(dir + "/w.csv", m.community.w);

  auto scores = open_out(dir + "/scores.csv");
  scores << "node,s,Q,sigma_hat\n";
  const Eigen::VectorXi types = hard_types(m.posterior.Q, decision_threshold);
  for (int i = 0; i < m.n(); ++i)
    scores << labels[static_cast<std::size_t>(i)] << ',' << format_double(m.ranking.s[i]) << ','
           << format_double(m.posterior.Q[i]) << ',' << types[i] << '\n';

  auto trace = open_out(dir + "/elbo_trace.csv");
  trace << "iter,elbo\n";
  for (std::size_t it = 0; it < fit.elbo_trace.size(); ++it)
    trace << it << ',' << format_double(fit.elbo_trace[it]) << '\n';
}

Model load_fit(const std::string& dir) {
  std::ifstream in(dir + "/theta.json");
  if (!in) throw std::runtime_error("cannot open: " + dir + "/theta.json");
  json theta;
  in >> theta;

  Model m;
  m.community.u = read_matrix_csv(dir + "/u.csv");
  m.community.v = read_matrix_csv(dir + "/v.csv");
  m.community.w = read_matrix_csv(dir + "/w.csv");
  m.ranking.c = theta.at("c").get<double>();
  m.ranking.beta = theta.at("beta").get<double>();
  m.delta0 = theta.at("delta0").get<double>();
  m.posterior.mu = theta.at("mu").get<double>();

  std::ifstream scores(dir + "/scores.csv");
  if (!scores) throw std::runtime_error("cannot open: " + dir + "/scores.csv");
  std::string line;
  std::getline(scores, line);  // header
  std::vector<double> s, q;
  while (std::getline(scores, line)) {
    if (line.empty()) continue;
    const auto fields = csv_fields(line);
    if (fields.size() < 3) throw std::runtime_error("bad scores.csv row in " + dir);
    s.push_back(std::stod(fields[1]));
    q.push_back(std::stod(fields[2]));
  }
  m.ranking.s = Eigen::Map<Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
  m.posterior.Q = Eigen::Map<Vec>(q.data(), static_cast<Eigen::Index>(q.size()));
  return m;
}

void save_ground_truth(const std::string& dir, const GroundTruth& gt) {
  fs::create_directories(dir);
  json j{{"sigma", ivec_to_json(gt.sigma)}, {"s", vec_to_json(gt.s)}, {"c", gt.c},
         {"delta0", gt.delta0},             {"mu", gt.mu},            {"beta", gt.beta}};
  open_out(dir + "/ground_truth.json") << j.dump(2) << '\n';
  write_matrix_csv(dir + "/u.csv", gt.u);
  write_matrix_csv(dir + "/v.csv", gt.v);
  write_matrix_csv(dir + "/w.csv", gt.w);
}

GroundTruth load_ground_truth(const std::string& dir) {
  std::ifstream in(dir + "/ground_truth.json");
  if (!in) throw std::runtime_error("cannot open: " + dir + "/ground_truth.json");
  json j;
  in >> j;
  GroundTruth gt;
  const auto& sig = j.at("sigma");
  gt.sigma = Eigen::VectorXi(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i)
    gt.sigma[static_cast<Eigen::Index>(i)] = sig[i].get<int>();
  const auto& s = j.at("s");
  gt.s = Vec(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) gt.s[static_cast<Eigen::Index>(i)] = s[i].get<double>();
  gt.c = j.at("c").get<double>();
  gt.delta0 = j.at("delta0").get<double>();
  gt.mu = j.at("mu").get<double>();
  gt.beta = j.at("beta").get<double>();
  gt.u = read_matrix_csv(dir + "/u.csv");
  gt.v = read_matrix_csv(dir + "/v.csv");
  gt.w = read_matrix_csv(dir + "/w.csv");
  return gt;
}

namespace {

json metrics_to_json(const FoldMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v.has_value() ? json(*v) : json(); };
  return json{{"fold", m.fold},
              {"K", m.K},
              {"lambda", m.lambda},
              {"edge_auc", opt(m.edge_auc)},
              {"type_auc", opt(m.type_auc)},
              {"type_auc_flipped", m.type_auc_flipped},
              {"cs", opt(m.cs)},
              {"pc_all", opt(m.pc_all)},
              {"pc_type1", opt(m.pc_type1)},
              {"runtime_sec", m.runtime_sec},
              {"converged", m.converged},
              {"final_elbo", m.final_elbo}};
}

std::string opt_str(const std::optional<double>& v) {
  return v.has_value() ? format_double(*v) : "";
}

void metrics_csv_header(std::ofstream& out) {
  out << "fold,K,lambda,edge_auc,type_auc,type_auc_flipped,cs,pc_all,pc_type1,"
         "runtime_sec,converged,final_elbo";
}

void metrics_csv_row(std::ofstream& out, const FoldMetrics& m) {
  out << m.fold << ',' << m.K << ',' << format_double(m.lambda) << ',' << opt_str(m.edge_auc)
      << ',' << opt_str(m.type_auc) << ',' << (m.type_auc_flipped ? 1 : 0) << ','
      << opt_str(m.cs) << ',' << opt_str(m.pc_all) << ',' << opt_str(m.pc_type1) << ','
      << format_double(m.runtime_sec) << ',' << (m.converged ? 1 : 0) << ','
      << format_double(m.final_elbo);
}

}  // namespace

void save_cv_report_json(const std::string& path, const CVReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(metrics_to_json(r));
  json grid = json::array();
  for (const auto& c : report.grid)
    grid.push_back(json{{"K", c.K},
                        {"lambda", c.lambda},
                        {"mean_edge_auc", c.mean_edge_auc},
                        {"std_edge_auc", c.std_edge_auc},
                        {"n_folds", c.n_folds}});
  json j{{"selected_K", report.selected_K},
         {"selected_lambda", report.selected_lambda},
         {"masked_reads", report.masked_reads},
         {"grid", grid},
         {"folds", rows}};
  open_out(path) << j.dump(2) << '\n';
}

void save_cv_report_csv(const std::string& path, const CVReport& report) {
  auto out = open_out(path);
  metrics_csv_header(out);
  out << '\n';
  for (const auto& r : report.rows) {
    metrics_csv_row(out, r);
    out << '\n';
  }
}

void save_sweep_csv(const std::string& path, const SweepTable& table) {
  auto out = open_out(path);
  out << "mu_gt,sample,model,";
  metrics_csv_header(out);
  out << '\n';
  for (const auto& r : table.rows) {
    out << format_double(r.mu_gt) << ',' << r.sample << ',' << r.model << ',';
    metrics_csv_row(out, r.metrics);
    out << '\n';
  }
}

void save_sweep_summary_json(const std::string& path, const SweepTable& table) {
  std::map<std::pair<double, std::string>, std::vector<const SweepRow*>> groups;
  for (const auto& r : table.rows) groups[{r.mu_gt, r.model}].push_back(&r);

  auto agg_json = [](const Aggregate& a) {
    return json{{"mean", a.mean}, {"std", a.stddev}, {"count", a.count}};
  };
  json out = json::array();
  for (const auto& [key, rows] : groups) {
    std::vector<std::optional<double>> ea, ta, cs, pa, p1;
    for (const SweepRow* r : rows) {
      ea.push_back(r->metrics.edge_auc);
      ta.push_back(r->metrics.type_auc);
      cs.push_back(r->metrics.cs);
      pa.push_back(r->metrics.pc_all);
      p1.push_back(r->metrics.pc_type1);
    }
    out.push_back(json{{"mu_gt", key.first},
                       {"model", key.second},
                       {"edge_auc", agg_json(aggregate(ea))},
                       {"type_auc", agg_json(aggregate(ta))},
                       {"cs", agg_json(aggregate(cs))},
                       {"pc_all", agg_json(aggregate(pa))},
                       {"pc_type1", agg_json(aggregate(p1))}});
  }
  open_out(path) << out.dump(2) << '\n';
}

}  // namespace rankcom
