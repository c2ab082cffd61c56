#include "rankcom/community.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rankcom {

double expected_count_m(int i, int j, const CommunityParams& p) {
  return p.u.row(i) * p.w * p.v.row(j).transpose();
}

Mat compute_rho(int i, int j, const CommunityParams& p, bool* degenerate) {
  const int K = p.k();
  Mat rho(K, K);
  for (int k = 0; k < K; ++k)
    for (int h = 0; h < K; ++h) rho(k, h) = p.u(i, k) * p.v(j, h) * p.w(k, h);
  const double total = rho.sum();
  if (degenerate != nullptr) *degenerate = !(total > 0.0);
  if (!(total > 0.0)) {
    rho.setConstant(1.0 / (K * K));
    return rho;
  }
  rho /= total;
  return rho;
}

namespace {

// num / den with the 0/0 -> 0 convention; a positive numerator over a null
// denominator cannot occur (numerator terms carry the same weights).
inline double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  if (num > 0.0) throw std::logic_error("membership update: positive numerator, null denominator");
  return 0.0;
}

}  // namespace

void update_memberships(const GraphView& view, CommunityParams& p, const Vec& Q,
                        const Regularization& reg) {
  const int n = p.n();
  const int K = p.k();
  Vec one_minus_q = Vec::Ones(n) - Q;

  // Factorized denominators subtract the self (and hidden) terms from a
  // global contraction; when the type weights are nearly saturated the
  // subtraction can cancel to zero in floating point while a tiny positive
  // numerator survives. The exact per-row sum settles those rows.

  // --- u block ---
  {
    Mat cv = p.v * p.w.transpose();  // cv(j,k) = sum_h v_jh w_kh
    Eigen::RowVectorXd z = one_minus_q.transpose() * cv;
    Mat u_new(n, K);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
      const double qi = one_minus_q[i];
      Eigen::RowVectorXd bracket = z - qi * cv.row(i);
      if (view.mask() != nullptr)
        for (int j : view.mask()->hidden_out(i)) bracket -= one_minus_q[j] * cv.row(j);
      Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(K);
      view.for_train_out(i, [&](int j, long long a) {
        const double m = p.u.row(i).dot(cv.row(j));
        if (m <= 0.0) return;  // all rho mass is zero for this pair
        num += (qi * one_minus_q[j] * static_cast<double>(a) / m) * cv.row(j);
      });
      for (int k = 0; k < K; ++k) {
        double den = reg.lambda_u + qi * std::max(bracket[k], 0.0);
        const double numerator = p.u(i, k) * num[k];
        if (numerator > 0.0 && !(den > 0.0)) {
          double exact = 0.0;
          for (int j = 0; j < n; ++j)
            if (j != i && !view.is_hidden(i, j)) exact += one_minus_q[j] * cv(j, k);
          den = reg.lambda_u + qi * std::max(exact, 0.0);
        }
        u_new(i, k) = safe_ratio(numerator, den);
      }
    }
    p.u = std::move(u_new);
  }

  // --- v block (uses the updated u) ---
  {
    Mat cu = p.u * p.w;  // cu(j,h) = sum_k u_jk w_kh
    Eigen::RowVectorXd z = one_minus_q.transpose() * cu;
    Mat v_new(n, K);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
      const double qi = one_minus_q[i];
      Eigen::RowVectorXd bracket = z - qi * cu.row(i);
      if (view.mask() != nullptr)
        for (int j : view.mask()->hidden_in(i)) bracket -= one_minus_q[j] * cu.row(j);
      Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(K);
      view.for_train_in(i, [&](int j, long long a) {
        const double m = cu.row(j).dot(p.v.row(i));
        if (m <= 0.0) return;
        num += (qi * one_minus_q[j] * static_cast<double>(a) / m) * cu.row(j);
      });
      for (int h = 0; h < K; ++h) {
        double den = reg.lambda_v + qi * std::max(bracket[h], 0.0);
        const double numerator = p.v(i, h) * num[h];
        if (numerator > 0.0 && !(den > 0.0)) {
          double exact = 0.0;
          for (int j = 0; j < n; ++j)
            if (j != i && !view.is_hidden(j, i)) exact += one_minus_q[j] * cu(j, h);
          den = reg.lambda_v + qi * std::max(exact, 0.0);
        }
        v_new(i, h) = safe_ratio(numerator, den);
      }
    }
    p.v = std::move(v_new);
  }

  // --- w block (uses the updated u and v) ---
  {
    Mat cv = p.v * p.w.transpose();
    Mat t = Mat::Zero(K, K);  // sum over visible edges of Xt * a / M * u_i v_j^T
    for (int i = 0; i < n; ++i) {
      const double qi = one_minus_q[i];
      if (qi == 0.0) continue;
      view.for_train_out(i, [&](int j, long long a) {
        const double m = p.u.row(i).dot(cv.row(j));
        if (m <= 0.0) return;
        t += (qi * one_minus_q[j] * static_cast<double>(a) / m) *
             (p.u.row(i).transpose() * p.v.row(j));
      });
    }
    Eigen::RowVectorXd su = one_minus_q.transpose() * p.u;
    Eigen::RowVectorXd sv = one_minus_q.transpose() * p.v;
    Mat bracket = su.transpose() * sv;
    for (int i = 0; i < n; ++i)
      bracket -= (one_minus_q[i] * one_minus_q[i]) * (p.u.row(i).transpose() * p.v.row(i));
    if (view.mask() != nullptr)
      for (int i = 0; i < n; ++i)
        for (int j : view.mask()->hidden_out(i))
          bracket -= (one_minus_q[i] * one_minus_q[j]) * (p.u.row(i).transpose() * p.v.row(j));
    for (int k = 0; k < K; ++k)
      for (int h = 0; h < K; ++h) {
        double den = reg.lambda_w + std::max(bracket(k, h), 0.0);
        const double numerator = p.w(k, h) * t(k, h);
        if (numerator > 0.0 && !(den > 0.0)) {
          double exact = 0.0;
          for (int i = 0; i < n; ++i) {
            if (one_minus_q[i] == 0.0) continue;
            double row = 0.0;
            for (int j = 0; j < n; ++j)
              if (j != i && !view.is_hidden(i, j)) row += one_minus_q[j] * p.v(j, h);
            exact += one_minus_q[i] * p.u(i, k) * row;
          }
          den = reg.lambda_w + std::max(exact, 0.0);
        }
        p.w(k, h) = safe_ratio(numerator, den);
      }
  }
}

}  // namespace rankcom
