#pragma once

#include <cstdint>
#include <string>

#include "rankcom/common.hpp"
#include "rankcom/graph.hpp"

namespace rankcom {

/// Gaussian-mixture specification of the score leagues.
struct LeagueSpec {
  Vec means;
  Vec stds;
  Vec weights;

  void validate() const;  // throws on malformed mixtures
};

enum class MembershipRule {
  kHardEqual,  // equal-size unmixed blocks, u = v
  kDirichlet,  // mixed memberships drawn from a symmetric Dirichlet
};

/// Planted parameters of a synthetic network: node types sigma, community
/// parameters (u, v, w), scores s with sparsity c, out-group rate delta0,
/// type prior mu, inverse temperature beta.
struct GroundTruth {
  Eigen::VectorXi sigma;
  Mat u, v, w;
  Vec s;
  double c = 1.0;
  double delta0 = 0.01;
  double mu = 0.5;
  double beta = 5.0;

  int n() const { return static_cast<int>(sigma.size()); }
  int k() const { return static_cast<int>(u.cols()); }
};

struct GroundTruthOptions {
  MembershipRule rule = MembershipRule::kHardEqual;
  double dirichlet_alpha = 1.0;
  double w_offdiag_ratio = 0.1;  // assortative affinity: off-diagonal / diagonal
};

/// sigma_i ~ Bernoulli(mu) i.i.d.; memberships per the rule (u = v);
/// diagonal-dominant affinity; scores from the league mixture. Each
/// component draws from its own named substream of `seed`.
GroundTruth sample_ground_truth(int n, int k, double mu, const LeagueSpec& leagues,
                                std::uint64_t seed, const GroundTruthOptions& opts = {});

/// delta0 upper bound for a feasible total target degree.
inline double delta0_bound(double avg_degree, double mu, int n) {
  const double denom = 2.0 * mu * (1.0 - mu) * n;
  return denom > 0.0 ? avg_degree / denom : std::numeric_limits<double>::infinity();
}

struct DegreeControl {
  double c_sr = 1.0;
  double c_mt = 1.0;
  double epsilon = 0.0;
  bool sr_active = false;  // false at mu = 0 (division by zero): pure community
  bool mt_active = false;  // false at mu = 1: pure ranking
};

/// Calibrates the sparsity scales so the expected degree decomposes into the
/// requested ranking / community targets plus the out-group noise
///   epsilon = 2 mu (1-mu) delta0 N:
///   c_SR = k_SR N / (mu (mu^2+(1-mu)^2) sum_ij e^{-beta H_ij}),
///   c_MT = k_MT N / ((1-mu)(mu^2+(1-mu)^2) sum_ijkh u_ik v_jh w^_kh).
/// Rescales gt.w by c_MT and sets gt.c = c_SR; a mechanism whose prefactor
/// vanishes is skipped. Throws when a target is negative (delta0 above its
/// bound) or a required denominator vanishes.
DegreeControl degree_control(double target_mean_degree_sr, double target_mean_degree_mt,
                             GroundTruth& gt);

/// One Poisson draw per ordered pair: S_ij for ranking pairs, M_ij for
/// community pairs, delta0 across types. Counter-based per-pair substreams
/// keep the result independent of scheduling.
DirectedWeightedGraph sample_network(const GroundTruth& gt, std::uint64_t seed);

/// Named synthetic protocols; every field is overridable.
struct SyntheticSpec {
  int n = 500;
  int k = 3;
  double avg_degree = 20.0;
  double beta = 5.0;
  double delta0 = 0.01;
  LeagueSpec leagues;  // {-4, 0, 4} / {1, 0.5, 1}, equal weights
  GroundTruthOptions gt_opts;

  static SyntheticSpec paper_synthetic();        // N = 500
  static SyntheticSpec paper_synthetic_small();  // N = 200 downscale
  static SyntheticSpec preset(const std::string& name);
};

struct Synthetic {
  GroundTruth truth;
  DirectedWeightedGraph graph;
};

/// Ground truth + degree-controlled network for a given type-prior mu. The
/// structural degree budget avg_degree - epsilon splits mu : (1-mu) between
/// the ranking and community mechanisms, which makes the realized total
/// degree match the target in expectation.
Synthetic make_synthetic(const SyntheticSpec& spec, double mu, std::uint64_t seed);

}  // namespace rankcom
