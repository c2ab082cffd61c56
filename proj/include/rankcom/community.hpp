#pragma once

#include "rankcom/common.hpp"
#include "rankcom/graph.hpp"

namespace rankcom {

/// Mixed-membership community parameters: out-going memberships u (N x K),
/// in-coming memberships v (N x K), affinity w (K x K). Entries are
/// non-negative and not normalized. The expected interaction count is
/// M_ij = sum_kh u_ik v_jh w_kh.
struct CommunityParams {
  Mat u, v, w;

  int n() const { return static_cast<int>(u.rows()); }
  int k() const { return static_cast<int>(u.cols()); }
};

/// Rates of the exponential priors on u, v, w; 0 disables a prior. The
/// resulting L1 penalty enters the membership updates and the objective.
struct Regularization {
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  double lambda_w = 0.0;

  bool active() const { return lambda_u > 0.0 || lambda_v > 0.0 || lambda_w > 0.0; }
};

/// M_ij as the bilinear form u_i^T w v_j.
double expected_count_m(int i, int j, const CommunityParams& p);

/// Variational pair-community probabilities rho_ijkh = u_ik v_jh w_kh / M_ij
/// (K x K, entries sum to 1). When M_ij = 0 the distribution is undefined;
/// returns uniform 1/K^2 and sets *degenerate.
Mat compute_rho(int i, int j, const CommunityParams& p, bool* degenerate = nullptr);

/// One multiplicative update of u, then v, then w (each block using the
/// freshly updated previous blocks), with type weights
/// (1-Q_i)(1-Q_j) and hidden entries contributing to neither numerators nor
/// denominators. Denominators use the factorized O(N K^2) form; numerators
/// touch stored edges only.
void update_memberships(const GraphView& view, CommunityParams& p, const Vec& Q,
                        const Regularization& reg);

}  // namespace rankcom
