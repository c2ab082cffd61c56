#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "rankcom/em.hpp"
#include "rankcom/graph.hpp"

namespace testutil {

class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    path_ = base / ("rankcom-test-" + std::to_string(rd()) + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

/// Random sparse multigraph with Poisson-ish weights.
inline rankcom::DirectedWeightedGraph random_graph(int n, double edge_prob, std::uint64_t seed,
                                                   int max_weight = 3) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> wdist(1, max_weight);
  std::vector<std::tuple<int, int, long long>> entries;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && unif(eng) < edge_prob) entries.emplace_back(i, j, wdist(eng));
  return rankcom::DirectedWeightedGraph(n, entries);
}

/// Random model state with positive parameters, for oracle comparisons.
inline rankcom::Model random_model(int n, int k, std::uint64_t seed, bool random_q = true) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  rankcom::Model m;
  m.community.u = rankcom::Mat(n, k);
  m.community.v = rankcom::Mat(n, k);
  m.community.w = rankcom::Mat(k, k);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) m.community.u(i, c) = unif(eng);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) m.community.v(i, c) = unif(eng);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) m.community.w(a, b) = a == b ? 0.5 + unif(eng) : 0.1 * unif(eng);
  m.ranking.s = rankcom::Vec(n);
  for (int i = 0; i < n; ++i) m.ranking.s[i] = normal(eng);
  m.ranking.c = 0.2 + unif(eng);
  m.ranking.beta = 2.0;
  m.posterior.Q = rankcom::Vec(n);
  for (int i = 0; i < n; ++i) m.posterior.Q[i] = random_q ? unif(eng) : 0.5;
  m.posterior.mu = 0.3 + 0.4 * unif(eng);
  m.delta0 = 0.02 + 0.05 * unif(eng);
  return m;
}

}  // namespace testutil
