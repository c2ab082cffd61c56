#pragma once

#include <vector>

#include "rankcom/common.hpp"
#include "rankcom/em.hpp"
#include "rankcom/graph.hpp"

namespace rankcom {

/// Couplings and fields of the spin model equivalent to the type posterior
/// P(sigma | A, theta) at unit inverse temperature, spins s_i = 2 sigma_i - 1.
/// J is asymmetric; its diagonal is zero (self-loops are neglected).
struct IsingFields {
  Mat J;
  Vec h;
};

/// J_ij = [lS_ij + lM_ij - 2 l0_ij] / 4,
/// h_i  = 1/4 sum_j (lS_ij + lS_ji - lM_ij - lM_ji) + 1/2 log(mu/(1-mu)),
/// where lX_ij is the Poisson log-pmf of A_ij under mechanism X with the
/// shared mean floor. Uses the full adjacency (no mask).
IsingFields compute_fields(const DirectedWeightedGraph& g, const Model& m);

/// Energy of a spin configuration: H = -sum_ij J_ij s_i s_j - sum_i h_i s_i,
/// so that -H equals log P(sigma, A | theta) up to a sigma-independent
/// constant.
double ising_energy(const IsingFields& f, const Eigen::VectorXi& sigma);

/// log P(sigma, A | theta) for one configuration (self-pairs excluded).
double log_joint(const DirectedWeightedGraph& g, const Model& m, const Eigen::VectorXi& sigma);

struct ExactPosterior {
  std::vector<double> log_prob;  // normalized, indexed by the sigma bitmask
  Vec marginals;                 // P(sigma_i = 1 | A, theta)
  double log_evidence = 0.0;     // log sum_sigma P(sigma, A | theta)
};

/// Brute-force enumeration of all 2^N type configurations; N <= 20.
ExactPosterior exact_posterior(const DirectedWeightedGraph& g, const Model& m);

/// residual_i = m_i - tanh(h_i + sum_j (J_ij + J_ji) m_j) with m = 2Q - 1.
/// The symmetrized coupling reflects that a node's conditional collects both
/// directed pair terms. Zero at a mean-field fixed point.
Vec self_consistency_residual(const IsingFields& f, const Vec& Q);

}  // namespace rankcom
