#include <doctest.h>

#include <cmath>

#include "sdrf/functionals.hpp"
#include "test_util.hpp"

using namespace sdrf;

namespace {

WeightedDistribution three_points() {
  WeightedDistribution d;
  d.points.append_row(std::vector<double>{0.0, 0.0});
  d.points.append_row(std::vector<double>{2.0, 0.0});
  d.points.append_row(std::vector<double>{0.0, 4.0});
  d.weights = {0.5, 0.25, 0.25};
  return d;
}

}  // namespace

TEST_CASE("moments of a weighted law") {
  const auto d = three_points();
  const auto mu = cond_mean(d);
  CHECK(mu[0] == doctest::Approx(0.5));
  CHECK(mu[1] == doctest::Approx(1.0));
  const auto c = cond_cov(d);
  CHECK(c(0, 0) == doctest::Approx(0.75));
  CHECK(c(1, 1) == doctest::Approx(3.0));
  CHECK(c(0, 1) == doctest::Approx(-0.5));
  CHECK(c(1, 0) == c(0, 1));
  CHECK_FALSE(summarize(d).degenerate);

  WeightedDistribution one;
  one.points.append_row(std::vector<double>{3.0, -1.0});
  one.weights = {1.0};
  const auto s = summarize(one);
  CHECK(s.degenerate);
  CHECK(s.covariance == Matrix(2, 2));
  CHECK(s.mean == std::vector<double>{3.0, -1.0});
}

TEST_CASE("componentwise cdf") {
  const auto d = three_points();
  CHECK(cond_cdf(d, std::vector<double>{0.0, 0.0}) == doctest::Approx(0.5));
  CHECK(cond_cdf(d, std::vector<double>{2.0, 0.0}) == doctest::Approx(0.75));
  CHECK(cond_cdf(d, std::vector<double>{2.0, 4.0}) == doctest::Approx(1.0));
  CHECK(cond_cdf(d, std::vector<double>{-1.0, 10.0}) == 0.0);
  CHECK_THROWS_AS(cond_cdf(d, std::vector<double>{1.0}), Error);
}

TEST_CASE("left-continuous quantiles") {
  WeightedDistribution d;
  for (double v : {3.0, 1.0, 2.0}) d.points.append_row(std::vector<double>{v});
  d.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(cond_quantile(d, 0, 1e-9) == 1.0);
  CHECK(cond_quantile(d, 0, 1.0 / 3) == 1.0);
  CHECK(cond_quantile(d, 0, 0.5) == 2.0);
  CHECK(cond_quantile(d, 0, 2.0 / 3) == 2.0);
  CHECK(cond_quantile(d, 0, 1.0) == 3.0);
  CHECK_THROWS_AS(cond_quantile(d, 1, 0.5), Error);

  // unnormalized weights give the same answer
  const std::vector<double> v{5, 1, 4}, w{2, 1, 1};
  CHECK(weighted_quantile(v, w, 0.25) == 1.0);
  CHECK(weighted_quantile(v, w, 0.5) == 4.0);
  CHECK(weighted_quantile(v, w, 0.51) == 5.0);
  CHECK_THROWS_AS(weighted_quantile(std::vector<double>{}, std::vector<double>{}, 0.5), Error);
}

TEST_CASE("quantiles are monotone in tau") {
  Rng rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.1, 1);
  WeightedDistribution d;
  double total = 0;
  for (int i = 0; i < 50; ++i) {
    d.points.append_row(std::vector<double>{normal(rng), normal(rng)});
    d.weights.push_back(unif(rng));
    total += d.weights.back();
  }
  for (double& w : d.weights) w /= total;
  double last = -INFINITY;
  for (double tau = 0.01; tau <= 1.0; tau += 0.01) {
    const double q = cond_quantile(d, 0, tau);
    CHECK(q >= last);
    last = q;
    // the cdf at the quantile reaches tau
    double below = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.points(i, 0) <= q) below += d.weights[i];
    }
    CHECK(below >= tau - 1e-12);
  }
}

TEST_CASE("mahalanobis score") {
  ConditionalSummary s;
  s.mean = {1.0, 2.0};
  s.covariance = Matrix(2, 2);
  s.covariance(0, 0) = 4.0;
  s.covariance(1, 1) = 1.0;
  CHECK(mahalanobis_score(s, std::vector<double>{3.0, 2.0}, 0.0) == doctest::Approx(1.0));
  CHECK(mahalanobis_score(s, std::vector<double>{1.0, 0.0}, 0.0) == doctest::Approx(4.0));
  s.covariance(0, 1) = s.covariance(1, 0) = 1.0;
  // [[4,1],[1,1]]^-1 = [[1,-1],[-1,4]] / 3
  CHECK(mahalanobis_score(s, std::vector<double>{2.0, 3.0}, 0.0) == doctest::Approx((1 - 2 + 4) / 3.0));
  CHECK(default_ridge(s.covariance) == doctest::Approx(1e-8 * 2.5));

  ConditionalSummary flat;
  flat.mean = {0.0, 0.0};
  flat.covariance = Matrix(2, 2);
  try {
    mahalanobis_score(flat, std::vector<double>{1.0, 1.0}, 0.0);
    FAIL("expected SingularCovariance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularCovariance);
  }
  CHECK(mahalanobis_score(flat, std::vector<double>{1.0, 0.0}, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("tolerance threshold is the weighted quantile of training scores") {
  const auto pop = test::small_population(1500, 3, 10, 2);
  TwoStageDesign d;
  d.expected_psus = {4, 4, 4};
  for (std::size_t i = 0; i < pop.size(); ++i) d.psu_size[{pop.stratum[i], pop.psu[i]}] = 1.0 + pop.psu[i] % 2;
  d.stage2_fraction = 0.5;
  const auto s = draw_sample(pop, d, 3);
  ForestConfig cfg;
  cfg.num_trees = 20;
  const Forest f = fit_forest(s, cfg);
  const auto scores = training_scores(f);
  const auto w = s.weights();
  for (double alpha : {0.1, 0.5}) {
    const auto region = tolerance_threshold(f, alpha);
    CHECK(region.threshold == weighted_quantile(scores, w, 1 - alpha));
    double inside = 0, total = 0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      total += w[a];
      if (tolerance_contains(region, f, s.x.row(a), s.y.row(a))) inside += w[a];
    }
    CHECK(inside / total >= 1 - alpha - 1e-12);
  }
  CHECK_THROWS_AS(tolerance_threshold(f, 0.0), Error);
}

TEST_CASE("mmd to a reference law") {
  const auto d = three_points();
  const KernelSpec k(1.0, 2);
  CHECK(mmd_to_reference(d, d, k) == doctest::Approx(0.0).epsilon(1e-7));
  auto e = d;
  e.points(0, 0) = 5.0;
  CHECK(mmd_to_reference(d, e, k) > 0.1);
}
