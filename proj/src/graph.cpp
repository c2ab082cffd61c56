#include "rankcom/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rankcom/rng.hpp"

namespace rankcom {

DirectedWeightedGraph::DirectedWeightedGraph(
    int n_nodes, const std::vector<std::tuple<int, int, long long>>& entries,
    std::vector<std::string> labels)
    : n_(n_nodes), labels_(std::move(labels)) {
  if (n_nodes < 0) throw std::invalid_argument("graph: negative node count");
  if (labels_.empty()) {
    labels_.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) labels_.push_back(std::to_string(i));
  }
  if (static_cast<int>(labels_.size()) != n_)
    throw std::invalid_argument("graph: label count does not match node count");

  std::vector<std::tuple<int, int, long long>> kept;
  kept.reserve(entries.size());
  for (const auto& [s, t, w] : entries) {
    if (s < 0 || s >= n_ || t < 0 || t >= n_)
      throw std::invalid_argument("graph: node index out of range");
    if (w <= 0) throw std::invalid_argument("graph: weights must be positive integers");
    if (s == t) {
      ++self_loops_dropped_;
      continue;
    }
    kept.emplace_back(s, t, w);
  }
  std::sort(kept.begin(), kept.end());
  // merge duplicates
  std::vector<std::tuple<int, int, long long>> merged;
  merged.reserve(kept.size());
  for (const auto& e : kept) {
    if (!merged.empty() && std::get<0>(merged.back()) == std::get<0>(e) &&
        std::get<1>(merged.back()) == std::get<1>(e)) {
      std::get<2>(merged.back()) += std::get<2>(e);
    } else {
      merged.push_back(e);
    }
  }

  out_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
  in_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (const auto& [s, t, w] : merged) {
    ++out_ptr_[static_cast<std::size_t>(s) + 1];
    ++in_ptr_[static_cast<std::size_t>(t) + 1];
    total_weight_ += w;
  }
  std::partial_sum(out_ptr_.begin(), out_ptr_.end(), out_ptr_.begin());
  std::partial_sum(in_ptr_.begin(), in_ptr_.end(), in_ptr_.begin());

  out_flat_.resize(merged.size());
  in_flat_.resize(merged.size());
  std::vector<std::size_t> cursor(out_ptr_.begin(), out_ptr_.end() - 1);
  for (const auto& [s, t, w] : merged) out_flat_[cursor[static_cast<std::size_t>(s)]++] = {t, w};
  // merged is sorted by (s, t); re-sort by (t, s) for the in-CSR.
  std::vector<std::tuple<int, int, long long>> by_target = merged;
  std::sort(by_target.begin(), by_target.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<1>(a), std::get<0>(a)) < std::tie(std::get<1>(b), std::get<0>(b));
  });
  cursor.assign(in_ptr_.begin(), in_ptr_.end() - 1);
  for (const auto& [s, t, w] : by_target) in_flat_[cursor[static_cast<std::size_t>(t)]++] = {s, w};
}

long long DirectedWeightedGraph::weight(int i, int j) const {
  auto row = out(i);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Nbr& e, int v) { return e.node < v; });
  if (it != row.end() && it->node == j) return it->weight;
  return 0;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> tokens;
  const bool has_comma = line.find(',') != std::string::npos;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      tokens.push_back(token);
      token.clear();
    }
  };
  for (char c : line) {
    const bool sep = has_comma ? (c == ',') : (c == ' ' || c == '\t');
    if (sep || c == '\r' || c == '\n') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (has_comma) {
    for (auto& t : tokens) {  // tolerate spaces around commas
      while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.erase(t.begin());
      while (!t.empty() && (t.back() == ' ' || t.back() == '\t')) t.pop_back();
    }
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  }
  return tokens;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

long long parse_weight(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  long long w = 0;
  try {
    w = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("edge list line " + std::to_string(line_no) +
                             ": weight '" + tok + "' is not an integer");
  }
  if (pos != tok.size())
    throw std::runtime_error("edge list line " + std::to_string(line_no) +
                             ": weight '" + tok + "' is not an integer");
  if (w <= 0)
    throw std::runtime_error("edge list line " + std::to_string(line_no) +
                             ": weight must be a positive integer, got " + tok);
  return w;
}

}  // namespace

DirectedWeightedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);

  std::unordered_map<std::string, int> index;
  std::vector<std::string> labels;
  bool fixed_universe = false;
  // A label sidecar (written by save_edge_list) pins the node universe and
  // ordering, so isolated nodes and the original indexing survive a
  // round-trip. Without it, labels map to indices in first-appearance order.
  if (std::ifstream sidecar(path + ".labels.json"); sidecar) {
    nlohmann::json j;
    sidecar >> j;
    for (const auto& l : j) {
      const std::string label = l.get<std::string>();
      index.emplace(label, static_cast<int>(labels.size()));
      labels.push_back(label);
    }
    fixed_universe = true;
  }

  std::vector<std::tuple<int, int, long long>> raw;
  auto node_of = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<int>(labels.size()));
    if (inserted) {
      if (fixed_universe)
        throw std::runtime_error("edge list: label '" + label + "' not in " + path +
                                 ".labels.json");
      labels.push_back(label);
    }
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  int self_loops = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto tokens = split_line(line);
    if (tokens.empty()) continue;
    if (first_data_line && tokens.size() >= 2 && lower(tokens[0]) == "source" &&
        lower(tokens[1]) == "target") {
      first_data_line = false;
      continue;  // header row
    }
    first_data_line = false;
    if (tokens.size() != 2 && tokens.size() != 3)
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": expected 2 or 3 columns, got " + std::to_string(tokens.size()));
    const long long w = tokens.size() == 3 ? parse_weight(tokens[2], line_no) : 1;
    const int s = node_of(tokens[0]);
    const int t = node_of(tokens[1]);
    if (s == t) ++self_loops;
    raw.emplace_back(s, t, w);
  }
  if (self_loops > 0)
    std::fprintf(stderr, "warning: %s: dropped %d self-loop entr%s\n", path.c_str(), self_loops,
                 self_loops == 1 ? "y" : "ies");
  const int n = static_cast<int>(labels.size());
  return DirectedWeightedGraph(n, raw, std::move(labels));
}

void save_edge_list(const DirectedWeightedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  for (int i = 0; i < g.n_nodes(); ++i)
    for (const Nbr& e : g.out(i))
      out << g.labels()[static_cast<std::size_t>(i)] << '\t'
          << g.labels()[static_cast<std::size_t>(e.node)] << '\t' << e.weight << '\n';
  if (!out) throw std::runtime_error("failed writing edge list: " + path);

  nlohmann::json sidecar = nlohmann::json::array();
  for (const auto& l : g.labels()) sidecar.push_back(l);
  std::ofstream side(path + ".labels.json");
  if (!side) throw std::runtime_error("cannot write label sidecar for: " + path);
  side << sidecar.dump() << '\n';
}

DegreeStats degree_stats(const DirectedWeightedGraph& g) {
  DegreeStats st;
  const int n = g.n_nodes();
  st.in_degree = Vec::Zero(n);
  st.out_degree = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (const Nbr& e : g.out(i)) {
      st.out_degree[i] += static_cast<double>(e.weight);
      st.in_degree[e.node] += static_cast<double>(e.weight);
    }
  st.mean_degree = n > 0 ? static_cast<double>(g.total_weight()) / n : 0.0;
  return st;
}

EntryMask::EntryMask(int n_nodes, std::vector<std::pair<int, int>> pairs) : n_(n_nodes) {
  out_.assign(static_cast<std::size_t>(n_), {});
  in_.assign(static_cast<std::size_t>(n_), {});
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [i, j] = pairs[k];
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
      throw std::invalid_argument("mask: pair index out of range");
    if (i == j) throw std::invalid_argument("mask: self-pairs cannot be hidden");
    if (k > 0 && pairs[k] == pairs[k - 1])
      throw std::invalid_argument("mask: duplicate hidden pair");
    out_[static_cast<std::size_t>(i)].push_back(j);
    in_[static_cast<std::size_t>(j)].push_back(i);
  }
  count_ = pairs.size();
}

bool EntryMask::contains(int i, int j) const {
  if (n_ == 0) return false;
  const auto& row = out_[static_cast<std::size_t>(i)];
  return std::binary_search(row.begin(), row.end(), j);
}

std::vector<std::pair<int, int>> EntryMask::pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(count_);
  for (int i = 0; i < n_; ++i)
    for (int j : out_[static_cast<std::size_t>(i)]) out.emplace_back(i, j);
  return out;
}

void EntryMask::save_json(const std::string& path) const {
  nlohmann::json j = nlohmann::json::array();
  for (auto [a, b] : pairs()) j.push_back({a, b});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mask: " + path);
  out << j.dump() << '\n';
}

EntryMask EntryMask::load_json(const std::string& path, int n_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mask: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(j.size());
  for (const auto& e : j) pairs.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return EntryMask(n_nodes, std::move(pairs));
}

std::vector<EntryMask> make_folds(const DirectedWeightedGraph& g, int k_folds,
                                  std::uint64_t seed) {
  const int n = g.n_nodes();
  const long long n_pairs = static_cast<long long>(n) * (n - 1);
  if (k_folds < 2) throw std::invalid_argument("make_folds: k_folds must be >= 2");
  if (k_folds > n_pairs)
    throw std::invalid_argument("make_folds: more folds than ordered pairs");

  std::vector<std::pair<int, int>> all;
  all.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) all.emplace_back(i, j);
  auto eng = rng::make_stream(seed, "folds");
  std::shuffle(all.begin(), all.end(), eng);

  std::vector<EntryMask> folds;
  folds.reserve(static_cast<std::size_t>(k_folds));
  for (int f = 0; f < k_folds; ++f) {
    const std::size_t lo = static_cast<std::size_t>(f) * all.size() / static_cast<std::size_t>(k_folds);
    const std::size_t hi =
        (static_cast<std::size_t>(f) + 1) * all.size() / static_cast<std::size_t>(k_folds);
    folds.emplace_back(n, std::vector<std::pair<int, int>>(all.begin() + static_cast<long>(lo),
                                                           all.begin() + static_cast<long>(hi)));
  }
  return folds;
}

long long GraphView::train_total_weight() const {
  long long total = g_->total_weight();
  if (mask_ != nullptr) {
    for (int i = 0; i < n(); ++i)
      for (int j : mask_->hidden_out(i)) total -= g_->weight(i, j);
  }
  return total;
}

long long GraphView::train_pair_count() const {
  const long long n = g_->n_nodes();
  return n * (n - 1) - (mask_ != nullptr ? static_cast<long long>(mask_->size()) : 0);
}

}  // namespace rankcom
