#include <doctest.h>

#include <algorithm>
#include <random>

#include "rankcom/evaluation.hpp"
#include "rankcom/serialize.hpp"
#include "test_util.hpp"

using namespace rankcom;

TEST_CASE("edge_score mixes the three mechanisms by the posterior") {
  auto m = testutil::random_model(3, 2, 1);
  const double s01 = expected_count_s(0, 1, m.ranking);
  const double m01 = expected_count_m(0, 1, m.community);

  m.posterior.Q << 1.0, 1.0, 0.0;
  CHECK(edge_score(0, 1, m) == doctest::Approx(s01).epsilon(1e-14));
  CHECK(edge_score(0, 2, m) == doctest::Approx(m.delta0).epsilon(1e-14));
  m.posterior.Q.setConstant(0.5);
  CHECK(edge_score(0, 1, m) ==
        doctest::Approx(0.25 * s01 + 0.25 * m01 + 0.5 * m.delta0).epsilon(1e-14));
  m.posterior.Q << 0.0, 0.0, 0.0;
  CHECK(edge_score(0, 1, m) == doctest::Approx(m01).epsilon(1e-14));
}

TEST_CASE("auc") {
  SUBCASE("perfect separation") {
    CHECK(*auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(*auc({0.9, 0.8, 0.1}, {0, 0, 1}) == doctest::Approx(0.0));
  }
  SUBCASE("all ties give 1/2") {
    CHECK(*auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
  }
  SUBCASE("single class is undefined") {
    CHECK_FALSE(auc({0.1, 0.2}, {1, 1}).has_value());
    CHECK_FALSE(auc({0.1, 0.2}, {0, 0}).has_value());
  }
  SUBCASE("matches the quadratic pair-counting oracle") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int round = 0; round < 20; ++round) {
      std::vector<double> scores(10);
      std::vector<char> labels(10);
      for (int i = 0; i < 10; ++i) {
        scores[i] = std::round(unif(eng) * 8.0) / 8.0;  // force some ties
        labels[i] = unif(eng) < 0.4 ? 1 : 0;
      }
      const auto fast = auc(scores, labels);
      double wins = 0.0;
      long long pairs = 0;
      for (int p = 0; p < 10; ++p)
        for (int q = 0; q < 10; ++q) {
          if (!labels[p] || labels[q]) continue;
          ++pairs;
          if (scores[p] > scores[q])
            wins += 1.0;
          else if (scores[p] == scores[q])
            wins += 0.5;
        }
      if (pairs == 0) {
        CHECK_FALSE(fast.has_value());
      } else {
        CHECK(*fast == doctest::Approx(wins / pairs).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("membership similarity") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat u(100, 3), v(100, 3);
  for (int i = 0; i < 100; ++i)
    for (int k = 0; k < 3; ++k) {
      u(i, k) = unif(eng);
      v(i, k) = unif(eng);
    }
  SUBCASE("identity scores 1") {
    CHECK(membership_similarity(u, v, u, v) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("column permutation is invisible") {
    Mat up(100, 3), vp(100, 3);
    const int perm[3] = {2, 0, 1};
    for (int k = 0; k < 3; ++k) {
      up.col(perm[k]) = u.col(k);
      vp.col(perm[k]) = v.col(k);
    }
    CHECK(membership_similarity(up, vp, u, v) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("row-wise positive rescaling is absorbed by the cosine") {
    Mat us = u, vs = v;
    for (int i = 0; i < 100; ++i) {
      us.row(i) *= 0.5 + unif(eng);
      vs.row(i) *= 0.5 + unif(eng);
    }
    CHECK(membership_similarity(us, vs, u, v) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("zero-row conventions") {
    Mat z = Mat::Zero(2, 2), nz = Mat::Ones(2, 2);
    CHECK(membership_similarity(z, z, z, z) == doctest::Approx(1.0));
    CHECK(membership_similarity(z, z, nz, nz) == doctest::Approx(0.0));
  }
  SUBCASE("random instance matches the all-permutations oracle") {
    Mat u2(100, 3), v2(100, 3);
    for (int i = 0; i < 100; ++i)
      for (int k = 0; k < 3; ++k) {
        u2(i, k) = unif(eng);
        v2(i, k) = unif(eng);
      }
    // independent brute force
    int perm[3] = {0, 1, 2};
    std::vector<int> idx{0, 1, 2};
    double best = -1.0;
    std::sort(idx.begin(), idx.end());
    do {
      double su = 0.0, sv = 0.0;
      for (int i = 0; i < 100; ++i) {
        double du = 0.0, nu = 0.0, tu = 0.0, dv = 0.0, nv = 0.0, tv = 0.0;
        for (int k = 0; k < 3; ++k) {
          du += u2(i, idx[static_cast<std::size_t>(k)]) * u(i, k);
          nu += u2(i, idx[static_cast<std::size_t>(k)]) * u2(i, idx[static_cast<std::size_t>(k)]);
          tu += u(i, k) * u(i, k);
          dv += v2(i, idx[static_cast<std::size_t>(k)]) * v(i, k);
          nv += v2(i, idx[static_cast<std::size_t>(k)]) * v2(i, idx[static_cast<std::size_t>(k)]);
          tv += v(i, k) * v(i, k);
        }
        su += du / std::sqrt(nu * tu);
        sv += dv / std::sqrt(nv * tv);
      }
      best = std::max(best, 0.5 * (su + sv) / 100.0);
    } while (std::next_permutation(idx.begin(), idx.end()));
    (void)perm;
    CHECK(membership_similarity(u2, v2, u, v) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("score correlation") {
  Vec truth(20), shifted(20), negated(20);
  std::mt19937_64 eng(13);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    truth[i] = normal(eng);
    shifted[i] = truth[i] + 11.5;
    negated[i] = -truth[i];
  }
  CHECK(*score_correlation(shifted, truth) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*score_correlation(negated, truth) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(score_correlation(Vec::Ones(5), truth.head(5)).has_value());

  // covariance formula oracle
  Vec a(20), b(20);
  for (int i = 0; i < 20; ++i) {
    a[i] = normal(eng);
    b[i] = 0.6 * a[i] + normal(eng);
  }
  const double ma = a.mean(), mb = b.mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum();
  const double den = std::sqrt(((a.array() - ma).square()).sum() * ((b.array() - mb).square()).sum());
  CHECK(*score_correlation(a, b) == doctest::Approx(cov / den).epsilon(1e-12));

  // restriction to a subset
  std::vector<int> subset{0, 2, 4, 6, 8};
  Vec a5(5), b5(5);
  for (int i = 0; i < 5; ++i) {
    a5[i] = a[subset[static_cast<std::size_t>(i)]];
    b5[i] = b[subset[static_cast<std::size_t>(i)]];
  }
  CHECK(*score_correlation(a, b, &subset) ==
        doctest::Approx(*score_correlation(a5, b5)).epsilon(1e-12));
}

TEST_CASE("cross_validate: determinism and non-leakage") {
  const auto g = testutil::random_graph(24, 0.25, 55);
  CVOptions opts;
  opts.k_grid = {2};
  opts.lambda_grid = {0.0, 0.1};
  opts.k_folds = 3;
  opts.seed = 9;
  opts.hp.n_restarts = 2;
  opts.hp.max_iter = 40;

  const CVReport a = cross_validate(g, opts);
  const CVReport b = cross_validate(g, opts);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].edge_auc == b.rows[i].edge_auc);
    CHECK(a.rows[i].final_elbo == b.rows[i].final_elbo);
  }
  CHECK(a.selected_K == b.selected_K);
  CHECK(a.selected_lambda == b.selected_lambda);
  CHECK(a.masked_reads == 0);
  CHECK(a.rows.size() == 6);  // 3 folds x 2 lambdas
}

TEST_CASE("cross_validate: single-class folds are reported absent") {
  // one edge: folds that miss it have no positives
  const DirectedWeightedGraph g(6, {{0, 1, 2}});
  CVOptions opts;
  opts.k_grid = {1};
  opts.lambda_grid = {0.0};
  opts.k_folds = 3;
  opts.seed = 2;
  opts.hp.n_restarts = 1;
  opts.hp.max_iter = 10;
  const CVReport report = cross_validate(g, opts);
  int absent = 0;
  for (const auto& row : report.rows) absent += row.edge_auc.has_value() ? 0 : 1;
  CHECK(absent >= 2);  // the edge sits in exactly one fold
}

TEST_CASE("report serialization round-trips structure") {
  testutil::TempDir tmp;
  const auto g = testutil::random_graph(15, 0.3, 66);
  CVOptions opts;
  opts.k_grid = {2};
  opts.lambda_grid = {0.0};
  opts.k_folds = 2;
  opts.seed = 4;
  opts.hp.n_restarts = 1;
  opts.hp.max_iter = 15;
  const CVReport report = cross_validate(g, opts);
  save_cv_report_json(tmp.file("report.json"), report);
  save_cv_report_csv(tmp.file("report.csv"), report);
  CHECK(std::filesystem::file_size(tmp.file("report.json")) > 0);
  CHECK(std::filesystem::file_size(tmp.file("report.csv")) > 0);
}
