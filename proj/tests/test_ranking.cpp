#include <doctest.h>

#include "rankcom/ranking.hpp"
#include "rankcom/reference.hpp"
#include "test_util.hpp"

using namespace rankcom;

TEST_CASE("expected_count_s") {
  RankingParams r;
  r.s = Vec(2);
  SUBCASE("unit score gap gives c for any beta") {
    r.s << 2.0, 1.0;
    r.c = 0.37;
    for (double beta : {0.1, 1.0, 5.0, 50.0}) {
      r.beta = beta;
      CHECK(expected_count_s(0, 1, r) == doctest::Approx(0.37).epsilon(1e-15));
    }
  }
  SUBCASE("equal scores, c=1, beta=5") {
    r.s << 0.4, 0.4;
    r.c = 1.0;
    r.beta = 5.0;
    CHECK(expected_count_s(0, 1, r) == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
    CHECK(expected_count_s(0, 1, r) == doctest::Approx(0.0820849986).epsilon(1e-9));
  }
  SUBCASE("beta=0 flattens the hierarchy") {
    r.s << -3.0, 7.0;
    r.c = 2.5;
    r.beta = 0.0;
    CHECK(expected_count_s(0, 1, r) == 2.5);
    CHECK(expected_count_s(1, 0, r) == 2.5);
  }
}

TEST_CASE("translation gauge leaves S unchanged") {
  // dyadic scores and a power-of-two shift make the identity exact in
  // floating point
  RankingParams r;
  r.s = Vec(3);
  r.s << 0.5, 1.25, -2.75;
  r.c = 1.3;
  r.beta = 5.0;
  RankingParams shifted = r;
  shifted.s.array() += 4.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(expected_count_s(i, j, r) == expected_count_s(i, j, shifted));
}

TEST_CASE("update_scores") {
  SUBCASE("single directed edge rests at unit gap") {
    const DirectedWeightedGraph g(2, {{0, 1, 1}});
    GraphView view(g);
    RankingParams r{Vec::Zero(2), 1.0, 5.0};
    const Vec q = Vec::Ones(2);
    for (int it = 0; it < 50; ++it) update_scores(view, r, q);
    CHECK(r.s[0] - r.s[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("node with no Q-weighted edges keeps its score") {
    const DirectedWeightedGraph g(3, {{0, 1, 2}, {1, 0, 1}, {2, 0, 1}});
    GraphView view(g);
    RankingParams r{Vec::Zero(3), 1.0, 5.0};
    r.s << 0.0, 0.0, 7.5;
    Vec q = Vec::Ones(3);
    q[0] = q[1] = 0.0;  // node 2's neighbors all carry zero weight in the sums
    const auto st = update_scores(view, r, q);
    CHECK(st.degenerate_nodes >= 1);
    // gauge shift is Q-weighted, so node 2 (the only Q mass) defines it
    CHECK(r.s[2] == doctest::Approx(0.0));
  }
  SUBCASE("Q=1 sweeps converge to the linear-system solution") {
    const auto g = testutil::random_graph(5, 0.7, 12);
    GraphView view(g);
    RankingParams r{Vec::Zero(5), 1.0, 5.0};
    const Vec q = Vec::Ones(5);
    for (int it = 0; it < 4000; ++it) update_scores(view, r, q);
    const Vec oracle = reference::springrank_solve(g);
    CHECK((r.s - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("update_c") {
  SUBCASE("beta=0 and Q=1 give the mean off-diagonal entry") {
    const auto g = testutil::random_graph(6, 0.4, 8);
    GraphView view(g);
    RankingParams r{Vec::Random(6), 1.0, 0.0};
    const double c = update_c(view, r, Vec::Ones(6));
    CHECK(c == doctest::Approx(static_cast<double>(g.total_weight()) / (6.0 * 5.0)).epsilon(1e-12));
  }
  SUBCASE("Q all zero keeps c and flags") {
    const auto g = testutil::random_graph(4, 0.5, 9);
    GraphView view(g);
    RankingParams r{Vec::Zero(4), 0.77, 5.0};
    bool degenerate = false;
    CHECK(update_c(view, r, Vec::Zero(4), &degenerate) == 0.77);
    CHECK(degenerate);
  }
  SUBCASE("random instance matches the dense double loop") {
    const auto g = testutil::random_graph(6, 0.5, 10);
    auto m = testutil::random_model(6, 2, 11);
    GraphView view(g);
    CHECK(update_c(view, m.ranking, m.posterior.Q) ==
          doctest::Approx(reference::update_c(g, nullptr, m.ranking, m.posterior.Q))
              .epsilon(1e-12));
  }
  SUBCASE("masked instance matches the dense double loop") {
    const auto g = testutil::random_graph(7, 0.5, 13);
    auto m = testutil::random_model(7, 2, 14);
    const auto folds = make_folds(g, 3, 15);
    GraphView view(g, &folds[1]);
    CHECK(update_c(view, m.ranking, m.posterior.Q) ==
          doctest::Approx(reference::update_c(g, &folds[1], m.ranking, m.posterior.Q))
              .epsilon(1e-12));
  }
}

TEST_CASE("moment matching: updated c equates Q-weighted S mass to data mass") {
  const auto g = testutil::random_graph(9, 0.4, 17);
  auto m = testutil::random_model(9, 2, 18);
  GraphView view(g);
  m.ranking.c = update_c(view, m.ranking, m.posterior.Q);
  const Vec& q = m.posterior.Q;
  double s_mass = 0.0, a_mass = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      if (i == j) continue;
      s_mass += q[i] * q[j] * expected_count_s(i, j, m.ranking);
      a_mass += q[i] * q[j] * static_cast<double>(g.weight(i, j));
    }
  CHECK(s_mass == doctest::Approx(a_mass).epsilon(1e-10));
}

TEST_CASE("springrank baseline") {
  SUBCASE("directed path has unit gaps") {
    const DirectedWeightedGraph g(3, {{0, 1, 1}, {1, 2, 1}});
    const Vec s = springrank_baseline(g);
    CHECK(s[0] - s[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s[1] - s[2] == doctest::Approx(1.0).epsilon(1e-10));
    const Vec oracle = reference::springrank_solve(g);
    CHECK((s - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("symmetric pair ties") {
    const DirectedWeightedGraph g(2, {{0, 1, 3}, {1, 0, 3}});
    const Vec s = springrank_baseline(g);
    CHECK(std::abs(s[0] - s[1]) < 1e-12);
  }
  SUBCASE("empty graph is all zeros") {
    const DirectedWeightedGraph g(4, {});
    CHECK(springrank_baseline(g).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("disconnected components solved independently with mean-zero gauge") {
    const DirectedWeightedGraph g(5, {{0, 1, 2}, {2, 3, 1}, {3, 4, 1}});
    const Vec s = springrank_baseline(g);
    CHECK(s[0] + s[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(s[2] + s[3] + s[4] == doctest::Approx(0.0).epsilon(1e-10));
    const Vec oracle = reference::springrank_solve(g);
    CHECK((s - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("stationarity residual on a connected random graph") {
    const auto g = testutil::random_graph(20, 0.3, 23);
    const Vec s = springrank_baseline(g);
    double max_resid = 0.0;
    for (int i = 0; i < 20; ++i) {
      double lhs = 0.0, rhs = 0.0;
      for (int j = 0; j < 20; ++j) {
        const double w = static_cast<double>(g.weight(i, j) + g.weight(j, i));
        lhs += w * (s[i] - s[j]);
        rhs += static_cast<double>(g.weight(i, j) - g.weight(j, i));
      }
      max_resid = std::max(max_resid, std::abs(lhs - rhs));
    }
    CHECK(max_resid < 1e-8);
  }
}
