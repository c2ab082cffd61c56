#include "rankcom/generative.hpp"

#include <limits>
#include <random>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "rankcom/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rankcom {

void LeagueSpec::validate() const {
  if (means.size() == 0) throw std::invalid_argument("league mixture: empty");
  if (stds.size() != means.size() || weights.size() != means.size())
    throw std::invalid_argument("league mixture: means/stds/weights lengths differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    if (!(stds[i] > 0.0)) throw std::invalid_argument("league mixture: stds must be positive");
    if (weights[i] < 0.0) throw std::invalid_argument("league mixture: negative weight");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("league mixture: weights must sum to 1");
}

GroundTruth sample_ground_truth(int n, int k, double mu, const LeagueSpec& leagues,
                                std::uint64_t seed, const GroundTruthOptions& opts) {
  if (n < 2) throw std::invalid_argument("sample_ground_truth: n must be >= 2");
  if (k < 1) throw std::invalid_argument("sample_ground_truth: k must be >= 1");
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("sample_ground_truth: mu not in [0,1]");
  leagues.validate();

  GroundTruth gt;
  gt.mu = mu;

  gt.sigma = Eigen::VectorXi(n);
  {
    auto eng = rng::make_stream(seed, "sigma");
    std::bernoulli_distribution bern(mu);
    for (int i = 0; i < n; ++i) gt.sigma[i] = mu >= 1.0 ? 1 : (mu <= 0.0 ? 0 : (bern(eng) ? 1 : 0));
  }

  gt.u = Mat::Zero(n, k);
  if (opts.rule == MembershipRule::kHardEqual) {
    // equal-size contiguous blocks
    for (int i = 0; i < n; ++i)
      gt.u(i, static_cast<int>(static_cast<long long>(i) * k / n)) = 1.0;
  } else {
    auto eng = rng::make_stream(seed, "membership");
    std::gamma_distribution<double> gamma(opts.dirichlet_alpha, 1.0);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int c = 0; c < k; ++c) {
        gt.u(i, c) = gamma(eng);
        row += gt.u(i, c);
      }
      if (row > 0.0) gt.u.row(i) /= row;
    }
  }
  gt.v = gt.u;

  gt.w = Mat::Constant(k, k, opts.w_offdiag_ratio);
  gt.w.diagonal().setConstant(1.0);

  gt.s = Vec(n);
  {
    auto eng = rng::make_stream(seed, "scores");
    std::discrete_distribution<int> pick(leagues.weights.data(),
                                         leagues.weights.data() + leagues.weights.size());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      const int league = pick(eng);
      gt.s[i] = leagues.means[league] + leagues.stds[league] * normal(eng);
    }
  }
  return gt;
}

DegreeControl degree_control(double target_mean_degree_sr, double target_mean_degree_mt,
                             GroundTruth& gt) {
  const int n = gt.n();
  const double mu = gt.mu;
  DegreeControl out;
  out.epsilon = 2.0 * mu * (1.0 - mu) * gt.delta0 * n;
  if (target_mean_degree_sr < 0.0 || target_mean_degree_mt < 0.0) {
    const double total = target_mean_degree_sr + target_mean_degree_mt + out.epsilon;
    throw std::invalid_argument(
        "degree_control: negative structural target; delta0 = " + std::to_string(gt.delta0) +
        " exceeds its bound " + std::to_string(delta0_bound(total, mu, n)));
  }
  const double type_match = mu * mu + (1.0 - mu) * (1.0 - mu);

  if (mu > 0.0 && target_mean_degree_sr > 0.0) {
    double sum_exp = 0.0;
    const double bh = 0.5 * gt.beta;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = gt.s[i] - gt.s[j] - 1.0;
        sum_exp += std::exp(-bh * d * d);
      }
    const double den = mu * type_match * sum_exp;
    if (!(den > 0.0)) throw std::invalid_argument("degree_control: vanishing ranking denominator");
    out.c_sr = target_mean_degree_sr * n / den;
    out.sr_active = true;
    gt.c = out.c_sr;
  }

  if (mu < 1.0 && target_mean_degree_mt > 0.0) {
    Eigen::RowVectorXd su = gt.u.colwise().sum();
    Eigen::RowVectorXd sv = gt.v.colwise().sum();
    double sum_m = su * gt.w * sv.transpose();
    for (int i = 0; i < n; ++i) sum_m -= gt.u.row(i) * gt.w * gt.v.row(i).transpose();
    const double den = (1.0 - mu) * type_match * sum_m;
    if (!(den > 0.0))
      throw std::invalid_argument("degree_control: vanishing community denominator");
    out.c_mt = target_mean_degree_mt * n / den;
    out.mt_active = true;
    gt.w *= out.c_mt;
  }
  return out;
}

DirectedWeightedGraph sample_network(const GroundTruth& gt, std::uint64_t seed) {
  const int n = gt.n();
  const double bh = 0.5 * gt.beta;
  std::vector<std::vector<std::tuple<int, int, long long>>> rows(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double mean;
      if (gt.sigma[i] == gt.sigma[j]) {
        if (gt.sigma[i] == 1) {
          const double d = gt.s[i] - gt.s[j] - 1.0;
          mean = gt.c * std::exp(-bh * d * d);
        } else {
          mean = gt.u.row(i) * gt.w * gt.v.row(j).transpose();
        }
      } else {
        mean = gt.delta0;
      }
      if (!(mean > 0.0)) continue;  // Poisson(0) is the point mass at 0
      auto eng = rng::pair_stream(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      std::poisson_distribution<long long> pois(mean);
      const long long a = pois(eng);
      if (a > 0) row.emplace_back(i, j, a);
    }
  }
  std::vector<std::tuple<int, int, long long>> entries;
  for (const auto& row : rows) entries.insert(entries.end(), row.begin(), row.end());
  return DirectedWeightedGraph(n, entries);
}

SyntheticSpec SyntheticSpec::paper_synthetic() {
  SyntheticSpec spec;
  spec.leagues.means = Vec(3);
  spec.leagues.means << -4.0, 0.0, 4.0;
  spec.leagues.stds = Vec(3);
  spec.leagues.stds << 1.0, 0.5, 1.0;
  spec.leagues.weights = Vec::Constant(3, 1.0 / 3.0);
  return spec;
}

SyntheticSpec SyntheticSpec::paper_synthetic_small() {
  SyntheticSpec spec = paper_synthetic();
  spec.n = 200;
  return spec;
}

SyntheticSpec SyntheticSpec::preset(const std::string& name) {
  if (name == "paper-synthetic") return paper_synthetic();
  if (name == "paper-synthetic-small") return paper_synthetic_small();
  throw std::invalid_argument("unknown preset: " + name);
}

Synthetic make_synthetic(const SyntheticSpec& spec, double mu, std::uint64_t seed) {
  GroundTruth gt =
      sample_ground_truth(spec.n, spec.k, mu, spec.leagues, seed, spec.gt_opts);
  gt.beta = spec.beta;
  gt.delta0 = spec.delta0;

  const double epsilon = 2.0 * mu * (1.0 - mu) * gt.delta0 * spec.n;
  const double structural = spec.avg_degree - epsilon;
  if (structural < 0.0)
    throw std::invalid_argument("make_synthetic: delta0 = " + std::to_string(gt.delta0) +
                                " exceeds its bound " +
                                std::to_string(delta0_bound(spec.avg_degree, mu, spec.n)));
  degree_control(mu * structural, (1.0 - mu) * structural, gt);

  DirectedWeightedGraph graph = sample_network(gt, rng::stream_seed(seed, "network"));
  return Synthetic{std::move(gt), std::move(graph)};
}

}  // namespace rankcom
