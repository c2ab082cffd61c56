#pragma once

#include <cstdint>
#include <vector>

#include "rankcom/common.hpp"
#include "rankcom/community.hpp"
#include "rankcom/graph.hpp"
#include "rankcom/ranking.hpp"

namespace rankcom {

/// Mean-field Bernoulli posterior over node types. Q_i is the probability
/// that node i interacts through the ranking mechanism; mu is the type
/// prior, kept away from {0,1} where its log diverges.
struct NodeTypePosterior {
  Vec Q;
  double mu = 0.5;
};

enum class QSchedule {
  kSequential,  // node-by-node with fresh values; coordinate ascent
  kParallel,    // all nodes from the previous Q; may oscillate
};

/// Freezing Q recovers the single-mechanism baselines: all-zero is the
/// community-only model, all-one the ranking-only model.
enum class QPin { kNone, kAllZero, kAllOne };

struct HyperParams {
  int K = 3;
  double beta = 5.0;
  Regularization reg;
  double tol = 1e-6;  // relative ELBO change, 3 consecutive iterations
  int max_iter = 500;
  int n_restarts = 5;
  std::uint64_t seed = 0;
  double decision_threshold = 0.5;  // hard type assignment
  QSchedule schedule = QSchedule::kSequential;
  int score_sweeps = 1;  // Gauss-Seidel sweeps per M-step
  // Reject/backtrack score sweeps that would lower the objective. The score
  // update optimizes only the edge-weighted spring energy, which is not
  // exactly the coordinate maximizer of the ELBO; the guard keeps full EM
  // sweeps non-decreasing. Ignored for pinned fits, which run the plain
  // baseline dynamics.
  bool monotone_guard = true;
};

/// Full parameter state theta plus the type posterior.
struct Model {
  CommunityParams community;
  RankingParams ranking;
  NodeTypePosterior posterior;
  double delta0 = 1e-3;

  int n() const { return static_cast<int>(posterior.Q.size()); }
};

struct FitDiagnostics {
  int monotonicity_violations = 0;  // ELBO drops beyond 1e-9 relative slack
  int guard_backtracks = 0;
  int guard_rejections = 0;
  int degenerate_c = 0;
  int degenerate_delta0 = 0;
  int degenerate_score_nodes = 0;  // max over iterations
  std::vector<double> restart_final_elbos;
};

struct FitResult {
  Model model;
  std::vector<double> elbo_trace;  // best restart, one value per EM sweep
  bool converged = false;
  int best_restart = 0;
  int iterations = 0;
  std::uint64_t masked_reads = 0;
  FitDiagnostics diag;
};

/// One mean-field E-step: Q_i <- logistic(log f_i1 - log f_i2) with the
/// pair log-pmf sums of the two in-group mechanisms and the out-group term,
/// computed in log space over visible entries only. Sequential schedule
/// updates nodes in index order with fresh values; parallel uses the
/// previous Q throughout. Throws if any node's log-odds is non-finite.
void e_step_q(const GraphView& view, Model& m, QSchedule schedule);

/// One M-step: memberships (u, v, w in sequence), sparsity c, scores s,
/// delta0, mu, in that order; hidden entries excluded everywhere.
void m_step(const GraphView& view, Model& m, const HyperParams& hp, QPin pin = QPin::kNone,
            FitDiagnostics* diag = nullptr);

/// Variational objective: Poisson terms of the three edge mechanisms with
/// their posterior weights, type-prior cross entropy, Bernoulli entropy of
/// Q, minus the L1 penalty when priors are active. Includes the log(a!)
/// normalization so values are comparable across models and bounded by the
/// exact log-evidence.
double elbo(const GraphView& view, const Model& m, const Regularization& reg);

/// Random initialization for one restart; the draw order is fixed so runs
/// are reproducible for a given (seed, restart).
Model init_model(const GraphView& view, const HyperParams& hp, QPin pin, std::uint64_t restart);

/// Full EM with restarts; returns the restart with the highest final ELBO.
/// Restarts run in parallel when threads are available; results do not
/// depend on the thread count.
FitResult fit(const DirectedWeightedGraph& g, const EntryMask* mask, const HyperParams& hp,
              QPin pin = QPin::kNone);

Eigen::VectorXi hard_types(const Vec& Q, double threshold = 0.5);

}  // namespace rankcom
