#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>

namespace rankcom {

// Row-major so per-node membership rows are contiguous.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// Floor applied to every Poisson mean inside a logarithm. Keeps log-pmfs
// finite for delta0 = 0 and for underflowed spring weights; all likelihood
// evaluations (EM, ELBO, Ising fields, exact enumeration) share it so the
// identities between them hold exactly for the floored surrogate.
inline constexpr double kPoissonMeanFloor = 1e-12;

// Clip for the type prior mu, whose log diverges at {0,1}.
inline constexpr double kMuClip = 1e-6;

/// log Pois(a; mean) with the mean floored inside the log.
inline double log_poisson(long long a, double mean) {
  double lp = -mean - std::lgamma(static_cast<double>(a) + 1.0);
  if (a > 0) lp += static_cast<double>(a) * std::log(std::max(mean, kPoissonMeanFloor));
  return lp;
}

inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Entropy of Bernoulli(q), with the 0*log(0) = 0 convention.
inline double bernoulli_entropy(double q) {
  double h = 0.0;
  if (q > 0.0) h -= q * std::log(q);
  if (q < 1.0) h -= (1.0 - q) * std::log(1.0 - q);
  return h;
}

}  // namespace rankcom
