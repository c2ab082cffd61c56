#pragma once

#include "rankcom/common.hpp"
#include "rankcom/em.hpp"
#include "rankcom/graph.hpp"

namespace rankcom::reference {

// Serial, dense, deliberately naive implementations of the model kernels.
// They share the production semantics (block order, floors, gauge) but use
// direct sums with no factorization, sparsity, or threads; the unit and
// acceptance suites compare the optimized kernels against them, and the
// benchmark target measures the gap.

Mat dense_m(const CommunityParams& p);
Mat dense_s(const RankingParams& r);

double elbo(const DirectedWeightedGraph& g, const EntryMask* mask, const Model& m,
            const Regularization& reg);

Vec e_step(const DirectedWeightedGraph& g, const EntryMask* mask, const Model& m,
           QSchedule schedule);

void update_memberships(const DirectedWeightedGraph& g, const EntryMask* mask, CommunityParams& p,
                        const Vec& Q, const Regularization& reg);

double update_c(const DirectedWeightedGraph& g, const EntryMask* mask, const RankingParams& r,
                const Vec& Q);

void score_sweep(const DirectedWeightedGraph& g, const EntryMask* mask, Vec& s, const Vec& Q);

/// Full M-step mirroring the production order (u, v, w, c, s sweep + gauge,
/// delta0, mu), with no monotonicity guard.
void m_step(const DirectedWeightedGraph& g, const EntryMask* mask, Model& m,
            const Regularization& reg);

/// Direct solution of the spring stationarity system
/// sum_j (A_ij + A_ji)(s_i - s_j) = sum_j (A_ij - A_ji), solved per weakly
/// connected component under a mean-zero gauge.
Vec springrank_solve(const DirectedWeightedGraph& g);

}  // namespace rankcom::reference
