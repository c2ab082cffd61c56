#include "rankcom/em.hpp"

#include <atomic>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "rankcom/parallel.hpp"
#include "rankcom/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rankcom {

namespace {

double clipped_mu(double mu) { return std::clamp(mu, kMuClip, 1.0 - kMuClip); }

// Log-odds of node i preferring the ranking mechanism, given the current Q
// of the other nodes. The log(a!) normalizations cancel between the two
// hypotheses and are omitted. `zv`/`zu` are sum_j (1-Q_j) * cv_j / cu_j.
double node_log_odds(const GraphView& view, const Model& m, const Mat& cv, const Mat& cu,
                     const Eigen::RowVectorXd& zv, const Eigen::RowVectorXd& zu, const Vec& q,
                     int i) {
  const int n = view.n();
  const Vec& s = m.ranking.s;
  const double c = m.ranking.c;
  const double bh = 0.5 * m.ranking.beta;
  const double d0 = m.delta0;
  const double ld0 = std::log(std::max(d0, kPoissonMeanFloor));
  const double mu = clipped_mu(m.posterior.mu);

  double delta = std::log(mu) - std::log(1.0 - mu);

  // Dense part, all j != i as if A were zero everywhere.
  double acc_s = 0.0, acc_q = 0.0;
  const double si = s[i];
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double d1 = si - s[j] - 1.0;
    const double d2 = s[j] - si - 1.0;
    acc_s += q[j] * (std::exp(-bh * d1 * d1) + std::exp(-bh * d2 * d2));
    acc_q += 1.0 - 2.0 * q[j];
  }
  delta -= c * acc_s;
  delta -= 2.0 * d0 * acc_q;
  delta += m.community.u.row(i).dot(zv - (1.0 - q[i]) * cv.row(i));
  delta += (zu - (1.0 - q[i]) * cu.row(i)).dot(m.community.v.row(i));

  // Hidden pairs contribute nothing: remove their dense part.
  if (view.mask() != nullptr) {
    for (int j : view.mask()->hidden_out(i)) {
      const double d1 = si - s[j] - 1.0;
      delta += q[j] * c * std::exp(-bh * d1 * d1);
      delta += (1.0 - 2.0 * q[j]) * d0;
      delta -= (1.0 - q[j]) * m.community.u.row(i).dot(cv.row(j));
    }
    for (int j : view.mask()->hidden_in(i)) {
      const double d2 = s[j] - si - 1.0;
      delta += q[j] * c * std::exp(-bh * d2 * d2);
      delta += (1.0 - 2.0 * q[j]) * d0;
      delta -= (1.0 - q[j]) * cu.row(j).dot(m.community.v.row(i));
    }
  }

  // Nonzero entries add their a*log(mean) parts.
  view.for_train_out(i, [&](int j, long long a) {
    const double d1 = si - s[j] - 1.0;
    const double sij = c * std::exp(-bh * d1 * d1);
    const double mij = m.community.u.row(i).dot(cv.row(j));
    delta += static_cast<double>(a) *
             (q[j] * std::log(std::max(sij, kPoissonMeanFloor)) + (1.0 - 2.0 * q[j]) * ld0 -
              (1.0 - q[j]) * std::log(std::max(mij, kPoissonMeanFloor)));
  });
  view.for_train_in(i, [&](int j, long long a) {
    const double d2 = s[j] - si - 1.0;
    const double sji = c * std::exp(-bh * d2 * d2);
    const double mji = cu.row(j).dot(m.community.v.row(i));
    delta += static_cast<double>(a) *
             (q[j] * std::log(std::max(sji, kPoissonMeanFloor)) + (1.0 - 2.0 * q[j]) * ld0 -
              (1.0 - q[j]) * std::log(std::max(mji, kPoissonMeanFloor)));
  });
  return delta;
}

[[noreturn]] void report_nonfinite(const GraphView& view, const Model& m, int i) {
  // Error path only: locate a pair whose terms are not finite.
  const int n = view.n();
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double sij = expected_count_s(i, j, m.ranking);
    const double mij = expected_count_m(i, j, m.community);
    if (!std::isfinite(sij) || !std::isfinite(mij))
      throw std::runtime_error("e-step: non-finite mean at pair (" + std::to_string(i) + ", " +
                               std::to_string(j) + ")");
  }
  throw std::runtime_error("e-step: non-finite log-odds at node " + std::to_string(i));
}

}  // namespace

void e_step_q(const GraphView& view, Model& m, QSchedule schedule) {
  const int n = view.n();
  Mat cv = m.community.v * m.community.w.transpose();
  Mat cu = m.community.u * m.community.w;

  if (schedule == QSchedule::kSequential) {
    Vec& q = m.posterior.Q;
    Eigen::RowVectorXd zv = (Vec::Ones(n) - q).transpose() * cv;
    Eigen::RowVectorXd zu = (Vec::Ones(n) - q).transpose() * cu;
    for (int i = 0; i < n; ++i) {
      const double delta = node_log_odds(view, m, cv, cu, zv, zu, q, i);
      if (!std::isfinite(delta)) report_nonfinite(view, m, i);
      const double fresh = logistic(delta);
      zv += (q[i] - fresh) * cv.row(i);
      zu += (q[i] - fresh) * cu.row(i);
      q[i] = fresh;
    }
  } else {
    const Vec q_old = m.posterior.Q;
    Eigen::RowVectorXd zv = (Vec::Ones(n) - q_old).transpose() * cv;
    Eigen::RowVectorXd zu = (Vec::Ones(n) - q_old).transpose() * cu;
    Vec q_new(n);
    std::atomic<int> bad{-1};
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
      const double delta = node_log_odds(view, m, cv, cu, zv, zu, q_old, i);
      if (!std::isfinite(delta)) bad.store(i);
      q_new[i] = logistic(delta);
    }
    if (bad.load() >= 0) report_nonfinite(view, m, bad.load());
    m.posterior.Q = std::move(q_new);
  }
}

namespace {

// Terms of the ELBO that depend on the scores: sum over visible pairs of
// Q_i Q_j (-S_ij + A_ij log S_ij), up to s-independent constants.
double score_block_objective(const GraphView& view, const RankingParams& r, const Vec& q) {
  const int n = view.n();
  const double bh = 0.5 * r.beta;
  return par::row_sum(n, [&](int i) {
    double acc = 0.0;
    const double si = r.s[i];
    if (q[i] > 0.0) {
      double dense = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = si - r.s[j] - 1.0;
        dense += q[j] * std::exp(-bh * d * d);
      }
      if (view.mask() != nullptr)
        for (int j : view.mask()->hidden_out(i)) {
          const double d = si - r.s[j] - 1.0;
          dense -= q[j] * std::exp(-bh * d * d);
        }
      acc -= q[i] * r.c * dense;
    }
    view.for_train_out(i, [&](int j, long long a) {
      const double d = si - r.s[j] - 1.0;
      const double sij = r.c * std::exp(-bh * d * d);
      acc += q[i] * q[j] * static_cast<double>(a) * std::log(std::max(sij, kPoissonMeanFloor));
    });
    return acc;
  });
}

void update_delta0(const GraphView& view, Model& m, FitDiagnostics* diag) {
  const int n = view.n();
  const Vec& q = m.posterior.Q;
  const double sq = q.sum();
  const double sq2 = q.squaredNorm();
  // sum over ordered i != j of (Q_i + Q_j - 2 Q_i Q_j)
  double den = 2.0 * (n - 1) * sq - 2.0 * (sq * sq - sq2);
  if (view.mask() != nullptr)
    for (int i = 0; i < n; ++i)
      for (int j : view.mask()->hidden_out(i)) den -= q[i] + q[j] - 2.0 * q[i] * q[j];
  double num = 0.0;
  for (int i = 0; i < n; ++i)
    view.for_train_out(i, [&](int j, long long a) {
      num += static_cast<double>(a) * (q[i] + q[j] - 2.0 * q[i] * q[j]);
    });
  if (den > 0.0) {
    m.delta0 = num / den;
  } else if (diag != nullptr) {
    ++diag->degenerate_delta0;
  }
}

}  // namespace

void m_step(const GraphView& view, Model& m, const HyperParams& hp, QPin pin,
            FitDiagnostics* diag) {
  const Vec& q = m.posterior.Q;

  if (pin != QPin::kAllOne) update_memberships(view, m.community, q, hp.reg);

  if (pin != QPin::kAllZero) {
    bool deg_c = false;
    m.ranking.c = update_c(view, m.ranking, q, &deg_c);
    if (deg_c && diag != nullptr) ++diag->degenerate_c;

    const bool guard = hp.monotone_guard && pin == QPin::kNone;
    Vec s_old;
    double obj_old = 0.0;
    if (guard) {
      s_old = m.ranking.s;
      obj_old = score_block_objective(view, m.ranking, q);
    }
    int degen = 0;
    for (int sweep = 0; sweep < hp.score_sweeps; ++sweep)
      degen = std::max(degen, update_scores(view, m.ranking, q).degenerate_nodes);
    if (diag != nullptr) diag->degenerate_score_nodes = std::max(diag->degenerate_score_nodes, degen);
    if (guard) {
      double obj_new = score_block_objective(view, m.ranking, q);
      if (!(obj_new >= obj_old)) {
        const Vec s_prop = m.ranking.s;
        bool accepted = false;
        double t = 0.5;
        for (int tries = 0; tries < 8 && !accepted; ++tries, t *= 0.5) {
          m.ranking.s = s_old + t * (s_prop - s_old);
          accepted = score_block_objective(view, m.ranking, q) >= obj_old;
        }
        if (diag != nullptr) {
          if (accepted)
            ++diag->guard_backtracks;
          else
            ++diag->guard_rejections;
        }
        if (!accepted) m.ranking.s = s_old;
      }
    }
  }

  update_delta0(view, m, diag);
  m.posterior.mu = clipped_mu(q.mean());
}

double elbo(const GraphView& view, const Model& m, const Regularization& reg) {
  const int n = view.n();
  const Vec& q = m.posterior.Q;
  const Vec& s = m.ranking.s;
  const double c = m.ranking.c;
  const double bh = 0.5 * m.ranking.beta;
  const double d0 = m.delta0;
  const double ld0 = std::log(std::max(d0, kPoissonMeanFloor));
  const Mat cv = m.community.v * m.community.w.transpose();

  // Spring and out-group terms pair by pair, plus the nonzero-entry
  // corrections of all three mechanisms; each ordered pair is owned by its
  // source row.
  double total = par::row_sum(n, [&](int i) {
    double acc = 0.0;
    const double si = s[i];
    const double qi = q[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = si - s[j] - 1.0;
      acc -= qi * q[j] * c * std::exp(-bh * d * d);
      acc -= (qi + q[j] - 2.0 * qi * q[j]) * d0;
    }
    if (view.mask() != nullptr)
      for (int j : view.mask()->hidden_out(i)) {
        const double d = si - s[j] - 1.0;
        acc += qi * q[j] * c * std::exp(-bh * d * d);
        acc += (qi + q[j] - 2.0 * qi * q[j]) * d0;
      }
    view.for_train_out(i, [&](int j, long long a) {
      const double d = si - s[j] - 1.0;
      const double sij = c * std::exp(-bh * d * d);
      const double mij = m.community.u.row(i).dot(cv.row(j));
      const double lgam = std::lgamma(static_cast<double>(a) + 1.0);
      const double y = qi * q[j];
      const double xt = (1.0 - qi) * (1.0 - q[j]);
      const double out = qi + q[j] - 2.0 * qi * q[j];
      const double da = static_cast<double>(a);
      acc += y * (da * std::log(std::max(sij, kPoissonMeanFloor)) - lgam);
      acc += xt * (da * std::log(std::max(mij, kPoissonMeanFloor)) - lgam);
      acc += out * (da * ld0 - lgam);
    });
    return acc;
  });

  // Community dense term, factorized: sum over visible i != j of
  // (1-Q_i)(1-Q_j) M_ij.
  {
    const Vec omq = Vec::Ones(n) - q;
    Eigen::RowVectorXd su = omq.transpose() * m.community.u;
    Eigen::RowVectorXd sv = omq.transpose() * m.community.v;
    double m_dense = su * m.community.w * sv.transpose();
    for (int i = 0; i < n; ++i)
      m_dense -= omq[i] * omq[i] * m.community.u.row(i).dot(cv.row(i));
    if (view.mask() != nullptr)
      for (int i = 0; i < n; ++i)
        for (int j : view.mask()->hidden_out(i))
          m_dense -= omq[i] * omq[j] * m.community.u.row(i).dot(cv.row(j));
    total -= m_dense;
  }

  const double mu = clipped_mu(m.posterior.mu);
  for (int i = 0; i < n; ++i) {
    total += q[i] * std::log(mu) + (1.0 - q[i]) * std::log(1.0 - mu);
    total += bernoulli_entropy(q[i]);
  }

  if (reg.active())
    total -= reg.lambda_u * m.community.u.sum() + reg.lambda_v * m.community.v.sum() +
             reg.lambda_w * m.community.w.sum();
  return total;
}

Model init_model(const GraphView& view, const HyperParams& hp, QPin pin, std::uint64_t restart) {
  const int n = view.n();
  const int K = hp.K;
  if (n < 1) throw std::invalid_argument("fit: empty graph");
  if (K < 1) throw std::invalid_argument("fit: K must be positive");

  auto eng = rng::make_stream(hp.seed, "init", restart);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Model m;
  m.community.u = Mat(n, K);
  m.community.v = Mat(n, K);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) m.community.u(i, k) = unif(eng);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) m.community.v(i, k) = unif(eng);
  m.community.w = Mat::Constant(K, K, 0.1);
  m.community.w.diagonal().setConstant(1.0);

  m.ranking.beta = hp.beta;
  m.ranking.s = Vec(n);
  for (int i = 0; i < n; ++i) m.ranking.s[i] = normal(eng);
  m.ranking.c = 1.0;
  // Warm the scores with a few plain ranking sweeps before adding
  // per-restart noise. A cold normal(0,1) start under a stiff beta leaves
  // almost every spring weight at zero, the first type update then writes
  // the ranking mechanism off wholesale, and no restart recovers.
  {
    const Vec full_weight = Vec::Ones(n);
    for (int sweep = 0; sweep < 30; ++sweep) update_scores(view, m.ranking, full_weight);
    const double spread = std::sqrt(
        (m.ranking.s.array() - m.ranking.s.mean()).square().sum() / std::max(1, n - 1));
    const double jitter = 0.25 * std::max(spread, 1.0);
    for (int i = 0; i < n; ++i) m.ranking.s[i] += jitter * normal(eng);
  }

  m.posterior.Q = Vec(n);
  switch (pin) {
    case QPin::kAllZero: m.posterior.Q.setZero(); break;
    case QPin::kAllOne: m.posterior.Q.setOnes(); break;
    case QPin::kNone:
      for (int i = 0; i < n; ++i) m.posterior.Q[i] = unif(eng);
      break;
  }
  m.posterior.mu = 0.5;

  const double total_a = static_cast<double>(view.train_total_weight());
  const double pairs = static_cast<double>(view.train_pair_count());
  m.delta0 = std::max(1e-3, (pairs > 0.0 ? total_a / pairs : 0.0) / 10.0);

  // Scale memberships so the initial community mass matches the data mass.
  {
    Eigen::RowVectorXd su = m.community.u.colwise().sum();
    Eigen::RowVectorXd sv = m.community.v.colwise().sum();
    Mat cv = m.community.v * m.community.w.transpose();
    double sum_m = su * m.community.w * sv.transpose();
    for (int i = 0; i < n; ++i) sum_m -= m.community.u.row(i).dot(cv.row(i));
    if (view.mask() != nullptr)
      for (int i = 0; i < n; ++i)
        for (int j : view.mask()->hidden_out(i)) sum_m -= m.community.u.row(i).dot(cv.row(j));
    if (sum_m > 0.0 && total_a > 0.0) {
      const double scale = std::sqrt(total_a / sum_m);
      m.community.u *= scale;
      m.community.v *= scale;
    }
  }

  bool deg = false;
  const double c0 = update_c(view, m.ranking, m.posterior.Q, &deg);
  if (!deg) m.ranking.c = c0;
  return m;
}

namespace {

struct RestartOutcome {
  Model model;
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
  FitDiagnostics diag;
  bool finite = true;
};

RestartOutcome run_restart(const GraphView& view, const HyperParams& hp, QPin pin,
                           std::uint64_t restart) {
  RestartOutcome out;
  out.model = init_model(view, hp, pin, restart);
  double prev = 0.0;
  bool have_prev = false;
  int streak = 0;
  for (int it = 0; it < hp.max_iter; ++it) {
    if (pin == QPin::kNone) e_step_q(view, out.model, hp.schedule);
    m_step(view, out.model, hp, pin, &out.diag);
    const double value = elbo(view, out.model, hp.reg);
    out.iterations = it + 1;
    if (!std::isfinite(value)) {
      out.finite = false;
      break;
    }
    out.trace.push_back(value);
    if (have_prev) {
      if (value < prev - 1e-9 * std::abs(prev)) ++out.diag.monotonicity_violations;
      const double rel = std::abs(value - prev) / std::max(std::abs(value), 1e-12);
      streak = rel < hp.tol ? streak + 1 : 0;
      if (streak >= 3) {
        out.converged = true;
        prev = value;
        break;
      }
    }
    prev = value;
    have_prev = true;
  }
  return out;
}

}  // namespace

FitResult fit(const DirectedWeightedGraph& g, const EntryMask* mask, const HyperParams& hp,
              QPin pin) {
  if (g.n_nodes() < 1) throw std::invalid_argument("fit: empty graph");
  GraphView view(g, mask);
  const int R = std::max(1, hp.n_restarts);
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(R));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int r = 0; r < R; ++r)
    outcomes[static_cast<std::size_t>(r)] =
        run_restart(view, hp, pin, static_cast<std::uint64_t>(r));

  int best = -1;
  for (int r = 0; r < R; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    if (!o.finite || o.trace.empty()) continue;
    if (best < 0 || o.trace.back() > outcomes[static_cast<std::size_t>(best)].trace.back())
      best = r;
  }
  if (best < 0) {
    std::string msg = "fit: all restarts diverged;";
    for (int r = 0; r < R; ++r)
      msg += " restart " + std::to_string(r) + ": " +
             std::to_string(outcomes[static_cast<std::size_t>(r)].iterations) + " iterations;";
    throw std::runtime_error(msg);
  }

  FitResult res;
  auto& chosen = outcomes[static_cast<std::size_t>(best)];
  res.model = std::move(chosen.model);
  res.elbo_trace = std::move(chosen.trace);
  res.converged = chosen.converged;
  res.best_restart = best;
  res.iterations = chosen.iterations;
  res.diag = chosen.diag;
  for (int r = 0; r < R; ++r) {
    const auto& o = outcomes[static_cast<std::size_t>(r)];
    res.diag.restart_final_elbos.push_back(
        o.finite && !o.trace.empty() ? o.trace.back() : std::numeric_limits<double>::quiet_NaN());
  }
  res.masked_reads = view.masked_reads();

  if (hp.schedule == QSchedule::kParallel && res.diag.monotonicity_violations > 0)
    std::fprintf(stderr,
                 "warning: parallel Q schedule: ELBO decreased in %d sweep(s); "
                 "the sequential schedule guarantees ascent\n",
                 res.diag.monotonicity_violations);
  return res;
}

Eigen::VectorXi hard_types(const Vec& Q, double threshold) {
  Eigen::VectorXi t(Q.size());
  for (Eigen::Index i = 0; i < Q.size(); ++i) t[i] = Q[i] >= threshold ? 1 : 0;
  return t;
}

}  // namespace rankcom
