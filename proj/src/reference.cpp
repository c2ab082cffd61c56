#include "rankcom/reference.hpp"

#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace rankcom::reference {

namespace {

bool visible(const EntryMask* mask, int i, int j) {
  return mask == nullptr || !mask->contains(i, j);
}

Mat dense_a(const DirectedWeightedGraph& g) {
  const int n = g.n_nodes();
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (const Nbr& e : g.out(i)) a(i, e.node) = static_cast<double>(e.weight);
  return a;
}

double clipped_mu(double mu) { return std::clamp(mu, kMuClip, 1.0 - kMuClip); }

}  // namespace

Mat dense_m(const CommunityParams& p) {
  const int n = p.n(), K = p.k();
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < K; ++k)
        for (int h = 0; h < K; ++h) m(i, j) += p.u(i, k) * p.v(j, h) * p.w(k, h);
  return m;
}

Mat dense_s(const RankingParams& r) {
  const int n = r.n();
  Mat s = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = expected_count_s(i, j, r);
  return s;
}

double elbo(const DirectedWeightedGraph& g, const EntryMask* mask, const Model& m,
            const Regularization& reg) {
  const int n = g.n_nodes();
  const Mat a = dense_a(g);
  const Mat ms = dense_s(m.ranking);
  const Mat mm = dense_m(m.community);
  const Vec& q = m.posterior.Q;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || !visible(mask, i, j)) continue;
      const long long aij = static_cast<long long>(a(i, j));
      const double y = q[i] * q[j];
      const double xt = (1.0 - q[i]) * (1.0 - q[j]);
      const double out = 1.0 - y - xt;
      total += y * log_poisson(aij, ms(i, j));
      total += xt * log_poisson(aij, mm(i, j));
      total += out * log_poisson(aij, m.delta0);
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

Vec e_step(const DirectedWeightedGraph& g, const EntryMask* mask, const Model& m,
           QSchedule schedule) {
  const int n = g.n_nodes();
  const Mat a = dense_a(g);
  const Mat ms = dense_s(m.ranking);
  const Mat mm = dense_m(m.community);
  const double mu = clipped_mu(m.posterior.mu);
  Vec q = m.posterior.Q;
  const Vec q_old = q;
  for (int i = 0; i < n; ++i) {
    const Vec& qr = schedule == QSchedule::kSequential ? q : q_old;
    double logf1 = std::log(mu);
    double logf2 = std::log(1.0 - mu);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (visible(mask, i, j)) {
        const long long aij = static_cast<long long>(a(i, j));
        logf1 += qr[j] * log_poisson(aij, ms(i, j)) +
                 (1.0 - 2.0 * qr[j]) * log_poisson(aij, m.delta0);
        logf2 += (1.0 - qr[j]) * log_poisson(aij, mm(i, j));
      }
      if (visible(mask, j, i)) {
        const long long aji = static_cast<long long>(a(j, i));
        logf1 += qr[j] * log_poisson(aji, ms(j, i)) +
                 (1.0 - 2.0 * qr[j]) * log_poisson(aji, m.delta0);
        logf2 += (1.0 - qr[j]) * log_poisson(aji, mm(j, i));
      }
    }
    q[i] = logistic(logf1 - logf2);
  }
  return q;
}

void update_memberships(const DirectedWeightedGraph& g, const EntryMask* mask, CommunityParams& p,
                        const Vec& Q, const Regularization& reg) {
  const int n = p.n(), K = p.k();
  const Mat a = dense_a(g);
  auto xt = [&](int i, int j) { return (1.0 - Q[i]) * (1.0 - Q[j]); };

  // u block
  {
    const Mat m = dense_m(p);
    Mat u_new = Mat::Zero(n, K);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) {
        double num = 0.0, den = reg.lambda_u;
        for (int j = 0; j < n; ++j) {
          if (j == i || !visible(mask, i, j)) continue;
          for (int h = 0; h < K; ++h) {
            if (m(i, j) > 0.0)
              num += xt(i, j) * a(i, j) * p.u(i, k) * p.v(j, h) * p.w(k, h) / m(i, j);
            den += xt(i, j) * p.v(j, h) * p.w(k, h);
          }
        }
        u_new(i, k) = den > 0.0 ? num / den : 0.0;
      }
    p.u = u_new;
  }
  // v block
  {
    const Mat m = dense_m(p);
    Mat v_new = Mat::Zero(n, K);
    for (int i = 0; i < n; ++i)
      for (int h = 0; h < K; ++h) {
        double num = 0.0, den = reg.lambda_v;
        for (int j = 0; j < n; ++j) {
          if (j == i || !visible(mask, j, i)) continue;
          for (int k = 0; k < K; ++k) {
            if (m(j, i) > 0.0)
              num += xt(j, i) * a(j, i) * p.u(j, k) * p.v(i, h) * p.w(k, h) / m(j, i);
            den += xt(j, i) * p.u(j, k) * p.w(k, h);
          }
        }
        v_new(i, h) = den > 0.0 ? num / den : 0.0;
      }
    p.v = v_new;
  }
  // w block
  {
    const Mat m = dense_m(p);
    Mat w_new = Mat::Zero(K, K);
    for (int k = 0; k < K; ++k)
      for (int h = 0; h < K; ++h) {
        double num = 0.0, den = reg.lambda_w;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            if (j == i || !visible(mask, i, j)) continue;
            if (m(i, j) > 0.0)
              num += xt(i, j) * a(i, j) * p.u(i, k) * p.v(j, h) * p.w(k, h) / m(i, j);
            den += xt(i, j) * p.u(i, k) * p.v(j, h);
          }
        w_new(k, h) = den > 0.0 ? num / den : 0.0;
      }
    p.w = w_new;
  }
}

double update_c(const DirectedWeightedGraph& g, const EntryMask* mask, const RankingParams& r,
                const Vec& Q) {
  const int n = g.n_nodes();
  const Mat a = dense_a(g);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || !visible(mask, i, j)) continue;
      const double d = r.s[i] - r.s[j] - 1.0;
      num += Q[i] * Q[j] * a(i, j);
      den += Q[i] * Q[j] * std::exp(-0.5 * r.beta * d * d);
    }
  return den > 0.0 ? num / den : r.c;
}

void score_sweep(const DirectedWeightedGraph& g, const EntryMask* mask, Vec& s, const Vec& Q) {
  const int n = g.n_nodes();
  const Mat a = dense_a(g);
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double aij = visible(mask, i, j) ? a(i, j) : 0.0;
      const double aji = visible(mask, j, i) ? a(j, i) : 0.0;
      num += Q[j] * (s[j] * (aji + aij) + (aij - aji));
      den += Q[j] * (aji + aij);
    }
    if (den > 0.0) s[i] = num / den;
  }
  const double qsum = Q.sum();
  if (qsum > 1e-12) s.array() -= Q.dot(s) / qsum;
}

void m_step(const DirectedWeightedGraph& g, const EntryMask* mask, Model& m,
            const Regularization& reg) {
  const int n = g.n_nodes();
  const Mat a = dense_a(g);
  const Vec& q = m.posterior.Q;

  update_memberships(g, mask, m.community, q, reg);
  m.ranking.c = update_c(g, mask, m.ranking, q);
  score_sweep(g, mask, m.ranking.s, q);

  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || !visible(mask, i, j)) continue;
      const double w = q[i] + q[j] - 2.0 * q[i] * q[j];
      num += a(i, j) * w;
      den += w;
    }
  if (den > 0.0) m.delta0 = num / den;
  m.posterior.mu = clipped_mu(q.mean());
}

Vec springrank_solve(const DirectedWeightedGraph& g) {
  const int n = g.n_nodes();
  const Mat a = dense_a(g);

  // weakly connected components
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int n_comp = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    std::vector<int> stack{start};
    comp[static_cast<std::size_t>(start)] = n_comp;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < n; ++j)
        if (comp[static_cast<std::size_t>(j)] < 0 && (a(i, j) > 0.0 || a(j, i) > 0.0)) {
          comp[static_cast<std::size_t>(j)] = n_comp;
          stack.push_back(j);
        }
    }
    ++n_comp;
  }

  Vec s = Vec::Zero(n);
  for (int c = 0; c < n_comp; ++c) {
    std::vector<int> nodes;
    for (int i = 0; i < n; ++i)
      if (comp[static_cast<std::size_t>(i)] == c) nodes.push_back(i);
    const int m = static_cast<int>(nodes.size());
    if (m == 1) continue;  // isolated node keeps score 0
    // stationarity system with an appended mean-zero gauge row
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    for (int p = 0; p < m; ++p) {
      const int i = nodes[static_cast<std::size_t>(p)];
      for (int r = 0; r < m; ++r) {
        const int j = nodes[static_cast<std::size_t>(r)];
        if (i == j) continue;
        const double w = a(i, j) + a(j, i);
        lhs(p, p) += w;
        lhs(p, r) -= w;
        rhs(p) += a(i, j) - a(j, i);
      }
      lhs(m, p) = 1.0;
    }
    const Eigen::VectorXd sol = lhs.colPivHouseholderQr().solve(rhs);
    for (int p = 0; p < m; ++p) s[nodes[static_cast<std::size_t>(p)]] = sol[p];
  }
  return s;
}

}  // namespace rankcom::reference
