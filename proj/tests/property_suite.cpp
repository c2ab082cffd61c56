// Standalone property suite: gauge invariance, the X-identity, AUC
// monotone-transform invariance, fold partition completeness, and the mask
// non-leakage counter. Runs in isolation with generated fixtures only.
#include <doctest.h>

#include <random>
#include <set>

#include "rankcom/em.hpp"
#include "rankcom/evaluation.hpp"
#include "rankcom/ranking.hpp"
#include "test_util.hpp"

using namespace rankcom;

TEST_CASE("property: translation gauge of the spring counts") {
  std::mt19937_64 eng(101);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  SUBCASE("exact for dyadic scores and power-of-two shifts") {
    RankingParams r;
    r.s = Vec(4);
    r.s << 0.5, -1.25, 2.75, 0.0;
    r.c = 1.7;
    r.beta = 5.0;
    for (double shift : {1.0, 2.0, 8.0, -4.0}) {
      RankingParams rs = r;
      rs.s.array() += shift;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          CHECK(expected_count_s(i, j, r) == expected_count_s(i, j, rs));
    }
  }
  SUBCASE("within roundoff for arbitrary scores") {
    for (int round = 0; round < 50; ++round) {
      RankingParams r;
      r.s = Vec(6);
      for (int i = 0; i < 6; ++i) r.s[i] = unif(eng);
      r.c = 0.5 + std::abs(unif(eng));
      r.beta = 5.0;
      RankingParams rs = r;
      const double shift = unif(eng);
      rs.s.array() += shift;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          CHECK(expected_count_s(i, j, r) ==
                doctest::Approx(expected_count_s(i, j, rs)).epsilon(1e-11));
    }
  }
}

TEST_CASE("property: X-identity 2QQ' - Q - Q' + 1 = QQ' + (1-Q)(1-Q')") {
  std::mt19937_64 eng(202);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int round = 0; round < 2000; ++round) {
    const double a = unif(eng), b = unif(eng);
    const double lhs = 2.0 * a * b - a - b + 1.0;
    const double rhs = a * b + (1.0 - a) * (1.0 - b);
    CHECK(std::abs(lhs - rhs) < 1e-12);
    CHECK(lhs >= -1e-12);  // it is a probability
    CHECK(lhs <= 1.0 + 1e-12);
  }
  // boundary values are exact
  for (double a : {0.0, 1.0})
    for (double b : {0.0, 1.0})
      CHECK(2.0 * a * b - a - b + 1.0 == a * b + (1.0 - a) * (1.0 - b));
}

TEST_CASE("property: AUC is invariant under strictly monotone transforms") {
  std::mt19937_64 eng(303);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int round = 0; round < 30; ++round) {
    const int n = 30;
    std::vector<double> scores(n);
    std::vector<char> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = std::round(unif(eng) * 4.0) / 4.0;  // with ties
      labels[i] = unif(eng) > 0.3 ? 1 : 0;
    }
    const auto base = auc(scores, labels);
    if (!base.has_value()) continue;
    auto transformed = [&](auto&& f) {
      std::vector<double> t(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) t[i] = f(scores[i]);
      return auc(t, labels);
    };
    CHECK(*transformed([](double x) { return 3.0 * x + 7.0; }) == *base);
    CHECK(*transformed([](double x) { return std::atan(x); }) == *base);
    CHECK(*transformed([](double x) { return x * x * x; }) == *base);
    CHECK(*transformed([](double x) { return std::exp(x); }) == *base);
  }
}

TEST_CASE("property: folds partition the off-diagonal index set") {
  std::mt19937_64 eng(404);
  for (int round = 0; round < 5; ++round) {
    const int n = 5 + static_cast<int>(eng() % 20);
    const int k = 2 + static_cast<int>(eng() % 5);
    const auto g = testutil::random_graph(n, 0.2, eng());
    const auto folds = make_folds(g, k, eng());
    std::size_t total = 0;
    std::set<std::pair<int, int>> seen;
    std::size_t min_size = static_cast<std::size_t>(-1), max_size = 0;
    for (const auto& f : folds) {
      total += f.size();
      min_size = std::min(min_size, f.size());
      max_size = std::max(max_size, f.size());
      for (auto pr : f.pairs()) CHECK(seen.insert(pr).second);
    }
    CHECK(total == static_cast<std::size_t>(n) * (n - 1));
    CHECK(max_size - min_size <= 1);  // near-equal
  }
}

TEST_CASE("property: fitting never reads hidden entries") {
  const auto g = testutil::random_graph(20, 0.3, 505);
  const auto folds = make_folds(g, 4, 3);
  HyperParams hp;
  hp.K = 2;
  hp.n_restarts = 2;
  hp.max_iter = 25;
  hp.seed = 1;
  for (const auto& fold : folds) {
    const FitResult r = fit(g, &fold, hp);
    CHECK(r.masked_reads == 0);
  }
  // the counter itself works
  GraphView view(g, &folds[0]);
  const auto pair = folds[0].pairs().front();
  (void)view.weight_checked(pair.first, pair.second);
  CHECK(view.masked_reads() == 1);
}
