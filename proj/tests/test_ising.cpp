#include <doctest.h>

#include "rankcom/ising.hpp"
#include "rankcom/generative.hpp"
#include "rankcom/reference.hpp"
#include "test_util.hpp"

using namespace rankcom;

namespace {

// S = M = delta0 for every pair: flat scores with c = delta0 e^{beta/2},
// single community with w = delta0.
Model indistinguishable_model(int n, double delta0, double mu) {
  Model m;
  m.community.u = Mat::Constant(n, 1, 1.0);
  m.community.v = Mat::Constant(n, 1, 1.0);
  m.community.w = Mat::Constant(1, 1, delta0);
  m.ranking.s = Vec::Zero(n);
  m.ranking.beta = 5.0;
  m.ranking.c = delta0 * std::exp(0.5 * m.ranking.beta);
  m.delta0 = delta0;
  m.posterior.mu = mu;
  m.posterior.Q = Vec::Constant(n, 0.5);
  return m;
}

}  // namespace

TEST_CASE("fields vanish when the mechanisms are indistinguishable") {
  const auto g = testutil::random_graph(5, 0.4, 1);
  const Model m = indistinguishable_model(5, 0.07, 0.5);
  const IsingFields f = compute_fields(g, m);
  CHECK(f.J.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.h.cwiseAbs().maxCoeff() < 1e-12);  // mu = 1/2 kills the prior field
  for (int i = 0; i < 5; ++i) CHECK(f.J(i, i) == 0.0);
}

TEST_CASE("prior field alone survives at mu != 1/2 when S = M") {
  const auto g = testutil::random_graph(4, 0.5, 2);
  const Model m = indistinguishable_model(4, 0.05, 0.8);
  const IsingFields f = compute_fields(g, m);
  const double expected = 0.5 * (std::log(0.8) - std::log(0.2));
  for (int i = 0; i < 4; ++i) CHECK(f.h[i] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("energy correspondence: -H + const = log joint for every configuration") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int n = 4;
    const auto g = testutil::random_graph(n, 0.5, 100 + seed);
    const auto m = testutil::random_model(n, 2, 200 + seed);
    const IsingFields f = compute_fields(g, m);
    double shift = 0.0;
    double max_dev = 0.0;
    for (std::uint32_t conf = 0; conf < (1u << n); ++conf) {
      Eigen::VectorXi sigma(n);
      for (int i = 0; i < n; ++i) sigma[i] = (conf >> i) & 1u;
      const double diff = log_joint(g, m, sigma) + ising_energy(f, sigma);
      if (conf == 0) {
        shift = diff;
      } else {
        max_dev = std::max(max_dev, std::abs(diff - shift));
      }
    }
    CHECK(max_dev < 1e-9 * (1.0 + std::abs(shift)));
  }
}

TEST_CASE("exact posterior") {
  SUBCASE("N=1 is the prior") {
    const DirectedWeightedGraph g(1, {});
    auto m = testutil::random_model(1, 1, 5);
    m.posterior.mu = 0.3;
    const ExactPosterior p = exact_posterior(g, m);
    CHECK(p.marginals[0] == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("indistinguishable mechanisms reduce to the i.i.d. prior") {
    const auto g = testutil::random_graph(5, 0.4, 6);
    const Model m = indistinguishable_model(5, 0.04, 0.35);
    const ExactPosterior p = exact_posterior(g, m);
    for (int i = 0; i < 5; ++i) CHECK(p.marginals[i] == doctest::Approx(0.35).epsilon(1e-9));
  }
  SUBCASE("normalization and the Jensen bound") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const int n = 6;
      const auto g = testutil::random_graph(n, 0.5, 300 + seed);
      const auto m = testutil::random_model(n, 2, 400 + seed);
      const ExactPosterior p = exact_posterior(g, m);
      double total = 0.0;
      for (double lp : p.log_prob) total += std::exp(lp);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

      GraphView view(g);
      CHECK(elbo(view, m, {}) <= p.log_evidence + 1e-9);
    }
  }
  SUBCASE("enumeration cap") {
    const DirectedWeightedGraph g(21, {});
    CHECK_THROWS_AS(exact_posterior(g, testutil::random_model(21, 1, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("self-consistency residual basics") {
  SUBCASE("free spins balance only at Q = 1/2") {
    IsingFields f{Mat::Zero(3, 3), Vec::Zero(3)};
    CHECK(self_consistency_residual(f, Vec::Constant(3, 0.5)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(self_consistency_residual(f, Vec::Constant(3, 0.9)).cwiseAbs().maxCoeff() > 0.1);
  }
  SUBCASE("strong fields pin the spins") {
    IsingFields f{Mat::Zero(2, 2), Vec::Constant(2, 25.0)};
    const Vec q = Vec::Constant(2, 1.0 - 1e-12);
    CHECK(self_consistency_residual(f, q).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("converged mean-field fit satisfies the tanh self-consistency") {
  SyntheticSpec spec;
  spec.n = 50;
  spec.k = 2;
  spec.avg_degree = 8.0;
  spec.beta = 5.0;
  spec.delta0 = 0.01;
  spec.leagues.means = Vec(2);
  spec.leagues.means << -2.0, 2.0;
  spec.leagues.stds = Vec::Constant(2, 0.5);
  spec.leagues.weights = Vec::Constant(2, 0.5);
  const Synthetic synth = make_synthetic(spec, 0.5, 99);

  HyperParams hp;
  hp.K = 2;
  hp.beta = 5.0;
  hp.n_restarts = 2;
  hp.max_iter = 2000;
  hp.tol = 1e-12;
  hp.seed = 4;
  FitResult res = fit(synth.graph, nullptr, hp);

  // settle Q at the fitted parameters: the tanh equation characterizes the
  // E-step fixed point
  GraphView view(synth.graph);
  for (int sweep = 0; sweep < 500; ++sweep) {
    const Vec before = res.model.posterior.Q;
    e_step_q(view, res.model, QSchedule::kSequential);
    if ((res.model.posterior.Q - before).cwiseAbs().maxCoeff() < 1e-14) break;
  }

  const IsingFields f = compute_fields(synth.graph, res.model);
  const Vec residual = self_consistency_residual(f, res.model.posterior.Q);
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-6);
}
