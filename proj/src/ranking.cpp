#include "rankcom/ranking.hpp"

#include <numeric>
#include <vector>

#include "rankcom/parallel.hpp"

namespace rankcom {

namespace {

int gs_sweep(const GraphView& view, Vec& s, const Vec& Q) {
  const int n = view.n();
  int degenerate = 0;
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    view.for_train_out(i, [&](int j, long long a) {
      const double w = Q[j] * static_cast<double>(a);
      num += w * (s[j] + 1.0);
      den += w;
    });
    view.for_train_in(i, [&](int j, long long a) {
      const double w = Q[j] * static_cast<double>(a);
      num += w * (s[j] - 1.0);
      den += w;
    });
    if (den > 0.0) {
      s[i] = num / den;
    } else {
      ++degenerate;  // no Q-weighted incident edges: score retained
    }
  }
  return degenerate;
}

bool gauge_shift(Vec& s, const Vec& Q) {
  const double qsum = Q.sum();
  if (!(qsum > 1e-12)) return false;
  s.array() -= Q.dot(s) / qsum;
  return true;
}

}  // namespace

ScoreUpdateStats update_scores(const GraphView& view, RankingParams& r, const Vec& Q) {
  ScoreUpdateStats st;
  st.degenerate_nodes = gs_sweep(view, r.s, Q);
  st.gauge_applied = gauge_shift(r.s, Q);
  return st;
}

double update_c(const GraphView& view, const RankingParams& r, const Vec& Q, bool* degenerate) {
  const int n = view.n();
  const double beta = r.beta;
  const Vec& s = r.s;
  double num = 0.0;
  for (int i = 0; i < n; ++i)
    view.for_train_out(i, [&](int j, long long a) { num += Q[i] * Q[j] * static_cast<double>(a); });
  const double den = par::row_sum(n, [&](int i) {
    if (Q[i] == 0.0) return 0.0;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = s[i] - s[j] - 1.0;
      acc += Q[j] * std::exp(-0.5 * beta * d * d);
    }
    if (view.mask() != nullptr)
      for (int j : view.mask()->hidden_out(i)) {
        const double d = s[i] - s[j] - 1.0;
        acc -= Q[j] * std::exp(-0.5 * beta * d * d);
      }
    return Q[i] * acc;
  });
  if (degenerate != nullptr) *degenerate = !(den > 0.0);
  if (!(den > 0.0)) return r.c;
  return num / den;
}

namespace {

// Weakly-connected components over the undirected support of A.
std::vector<int> components(const DirectedWeightedGraph& g) {
  const int n = g.n_nodes();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (const Nbr& e : g.out(i)) {
      const int a = find(i), b = find(e.node);
      if (a != b) parent[static_cast<std::size_t>(a)] = b;
    }
  std::vector<int> comp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(i)] = find(i);
  return comp;
}

}  // namespace

Vec springrank_baseline(const DirectedWeightedGraph& g, SpringRankOptions opts) {
  const int n = g.n_nodes();
  GraphView view(g);
  Vec q = Vec::Ones(n);
  Vec s = Vec::Zero(n);
  const long long cap =
      opts.max_sweeps > 0 ? opts.max_sweeps
                          : std::max<long long>(10000, 50LL * n);
  for (long long it = 0; it < cap; ++it) {
    Vec prev = s;
    gs_sweep(view, s, q);
    gauge_shift(s, q);
    if ((s - prev).cwiseAbs().maxCoeff() < opts.tol) break;
  }
  // per-component gauge: mean 0 within each component
  const std::vector<int> comp = components(g);
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  std::vector<int> count(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    sum[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] += s[i];
    ++count[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])];
  }
  for (int i = 0; i < n; ++i) {
    const int c = comp[static_cast<std::size_t>(i)];
    s[i] -= sum[static_cast<std::size_t>(c)] / count[static_cast<std::size_t>(c)];
  }
  return s;
}

}  // namespace rankcom
