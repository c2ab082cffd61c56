#pragma once

#include "rankcom/common.hpp"
#include "rankcom/graph.hpp"

namespace rankcom {

/// Spring-hierarchy parameters: real scores s, sparsity coefficient c, and
/// the inverse temperature beta (a hyperparameter, fixed during fitting).
/// The expected interaction count is S_ij = c * exp(-beta/2 (s_i - s_j - 1)^2),
/// invariant under adding a constant to all scores.
struct RankingParams {
  Vec s;
  double c = 1.0;
  double beta = 5.0;

  int n() const { return static_cast<int>(s.size()); }
};

inline double expected_count_s(int i, int j, const RankingParams& r) {
  const double d = r.s[i] - r.s[j] - 1.0;
  return r.c * std::exp(-0.5 * r.beta * d * d);
}

struct ScoreUpdateStats {
  int degenerate_nodes = 0;  // nodes with no Q-weighted incident edges; score retained
  bool gauge_applied = false;
};

/// One Gauss-Seidel sweep of the score fixed-point equation
///   s_i = [sum_j Q_j s_j (A_ji + A_ij) + Q_j (A_ij - A_ji)] / [sum_j Q_j (A_ji + A_ij)]
/// (the common Q_i factor cancels), nodes in index order with fresh values,
/// hidden entries excluded. Afterwards the Q-weighted mean is shifted to 0,
/// which the translation gauge of S_ij makes legal.
ScoreUpdateStats update_scores(const GraphView& view, RankingParams& r, const Vec& Q);

/// c = sum_ij Q_i Q_j A_ij / sum_ij Q_i Q_j exp(-beta/2 (s_i-s_j-1)^2) over
/// visible pairs. A vanishing denominator (Q ~ 0 everywhere) keeps the
/// previous c and sets *degenerate.
double update_c(const GraphView& view, const RankingParams& r, const Vec& Q,
                bool* degenerate = nullptr);

struct SpringRankOptions {
  double tol = 1e-13;   // max |delta s| per sweep
  long long max_sweeps = 0;  // 0 -> max(1000, 5 N^2)
};

/// Standalone ranking baseline: iterates update_scores with Q pinned to 1
/// until convergence, which solves the spring stationarity system
/// sum_j (A_ij + A_ji)(s_i - s_j) = sum_j (A_ij - A_ji). Disconnected
/// components are handled independently with per-component mean-zero gauge.
Vec springrank_baseline(const DirectedWeightedGraph& g, SpringRankOptions opts = {});

}  // namespace rankcom
