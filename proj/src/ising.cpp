#include "rankcom/ising.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rankcom {

namespace {

// Pairwise Poisson log-pmf tables for the three mechanisms.
struct PairTables {
  Mat ls, lm, l0;
};

PairTables pair_tables(const DirectedWeightedGraph& g, const Model& m) {
  const int n = g.n_nodes();
  PairTables t{Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const long long a = g.weight(i, j);
      t.ls(i, j) = log_poisson(a, expected_count_s(i, j, m.ranking));
      t.lm(i, j) = log_poisson(a, expected_count_m(i, j, m.community));
      t.l0(i, j) = log_poisson(a, m.delta0);
    }
  return t;
}

double clipped_mu(double mu) { return std::clamp(mu, kMuClip, 1.0 - kMuClip); }

}  // namespace

IsingFields compute_fields(const DirectedWeightedGraph& g, const Model& m) {
  const int n = g.n_nodes();
  const PairTables t = pair_tables(g, m);
  IsingFields f{Mat::Zero(n, n), Vec::Zero(n)};
  const double mu = clipped_mu(m.posterior.mu);
  const double prior_field = 0.5 * (std::log(mu) - std::log(1.0 - mu));
  for (int i = 0; i < n; ++i) {
    double hi = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      f.J(i, j) = 0.25 * (t.ls(i, j) + t.lm(i, j) - 2.0 * t.l0(i, j));
      hi += t.ls(i, j) + t.ls(j, i) - t.lm(i, j) - t.lm(j, i);
    }
    f.h[i] = 0.25 * hi + prior_field;
  }
  return f;
}

double ising_energy(const IsingFields& f, const Eigen::VectorXi& sigma) {
  const int n = static_cast<int>(sigma.size());
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double si = 2.0 * sigma[i] - 1.0;
    e -= f.h[i] * si;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      e -= f.J(i, j) * si * (2.0 * sigma[j] - 1.0);
    }
  }
  return e;
}

double log_joint(const DirectedWeightedGraph& g, const Model& m, const Eigen::VectorXi& sigma) {
  const int n = g.n_nodes();
  const double mu = clipped_mu(m.posterior.mu);
  double lp = 0.0;
  for (int i = 0; i < n; ++i) lp += sigma[i] == 1 ? std::log(mu) : std::log(1.0 - mu);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const long long a = g.weight(i, j);
      if (sigma[i] == sigma[j]) {
        lp += sigma[i] == 1 ? log_poisson(a, expected_count_s(i, j, m.ranking))
                            : log_poisson(a, expected_count_m(i, j, m.community));
      } else {
        lp += log_poisson(a, m.delta0);
      }
    }
  return lp;
}

ExactPosterior exact_posterior(const DirectedWeightedGraph& g, const Model& m) {
  const int n = g.n_nodes();
  if (n > 20) throw std::invalid_argument("exact_posterior: N > 20 enumeration cap");
  const PairTables t = pair_tables(g, m);
  const double mu = clipped_mu(m.posterior.mu);
  const double log_mu = std::log(mu), log_1mu = std::log(1.0 - mu);
  const std::uint32_t n_conf = 1u << n;

  std::vector<double> lp(n_conf);
  auto eval = [&](std::uint32_t mask) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool si = (mask >> i) & 1u;
      acc += si ? log_mu : log_1mu;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const bool sj = (mask >> j) & 1u;
        if (si == sj) {
          acc += si ? t.ls(i, j) : t.lm(i, j);
        } else {
          acc += t.l0(i, j);
        }
      }
    }
    return acc;
  };

  // Fill the log-joints in parallel over fixed blocks (disjoint writes),
  // then normalize serially with log-sum-exp; the result does not depend on
  // the thread count.
  constexpr std::uint32_t kBlock = 4096;
  const int n_blocks = static_cast<int>((n_conf + kBlock - 1) / kBlock);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < n_blocks; ++b) {
    const std::uint32_t lo = static_cast<std::uint32_t>(b) * kBlock;
    const std::uint32_t hi = std::min(n_conf, lo + kBlock);
    for (std::uint32_t c = lo; c < hi; ++c) lp[c] = eval(c);
  }
  double log_max = -std::numeric_limits<double>::infinity();
  for (std::uint32_t c = 0; c < n_conf; ++c) log_max = std::max(log_max, lp[c]);

  double z = 0.0;
  Vec marg = Vec::Zero(n);
  for (std::uint32_t c = 0; c < n_conf; ++c) {
    const double p = std::exp(lp[c] - log_max);
    z += p;
    for (int i = 0; i < n; ++i)
      if ((c >> i) & 1u) marg[i] += p;
  }

  ExactPosterior out;
  out.log_evidence = log_max + std::log(z);
  out.marginals = marg / z;
  out.log_prob.resize(n_conf);
  for (std::uint32_t c = 0; c < n_conf; ++c) out.log_prob[c] = lp[c] - out.log_evidence;
  return out;
}

Vec self_consistency_residual(const IsingFields& f, const Vec& Q) {
  const int n = static_cast<int>(Q.size());
  Vec m = 2.0 * Q.array() - 1.0;
  Vec r(n);
  for (int i = 0; i < n; ++i) {
    double field = f.h[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      field += (f.J(i, j) + f.J(j, i)) * m[j];
    }
    r[i] = m[i] - std::tanh(field);
  }
  return r;
}

}  // namespace rankcom
