#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sdrf/bootstrap.hpp"
#include "test_util.hpp"

using namespace sdrf;

namespace {

// Largest |mean - 1| / SE over units for `draws` multiplier vectors.
double worst_r2_z(const SurveySample& s, const BootstrapConfig& cfg, int draws, std::uint64_t seed) {
  std::vector<double> sum(s.size(), 0.0), sum2(s.size(), 0.0);
  for (int r = 0; r < draws; ++r) {
    const auto m = design_resample(s, cfg, derive_seed(seed, static_cast<std::uint64_t>(r))).multipliers;
    for (std::size_t i = 0; i < s.size(); ++i) {
      sum[i] += m[i];
      sum2[i] += m[i] * m[i];
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double mean = sum[i] / draws;
    const double var = std::max(0.0, sum2[i] / draws - mean * mean);
    const double se = std::sqrt(var / draws);
    if (se == 0.0) {
      CHECK(mean == doctest::Approx(1.0));
      continue;
    }
    worst = std::max(worst, std::abs(mean - 1.0) / se);
  }
  return worst;
}

TwoStageDesign two_stage_for(const FinitePopulation& pop, double n_h, double f2) {
  TwoStageDesign d;
  int h_max = 0;
  for (int h : pop.stratum) h_max = std::max(h_max, h);
  d.expected_psus.assign(static_cast<std::size_t>(h_max), n_h);
  for (std::size_t i = 0; i < pop.size(); ++i) d.psu_size[{pop.stratum[i], pop.psu[i]}] = 1.0 + pop.psu[i] % 4;
  d.stage2_fraction = f2;
  return d;
}

}  // namespace

TEST_CASE("iid multipliers are multinomial counts") {
  const auto d = iid_multipliers(50, 3);
  CHECK(d.scheme == ResampleScheme::iid_multinomial);
  CHECK(std::accumulate(d.multipliers.begin(), d.multipliers.end(), 0.0) == 50.0);
  for (double m : d.multipliers) CHECK(m == std::floor(m));
  CHECK(iid_multipliers(50, 3).multipliers == d.multipliers);
}

TEST_CASE("multipliers have conditional mean one") {
  const auto pop = test::small_population(300, 3, 10, 21);
  BootstrapConfig cfg;

  SUBCASE("poisson") {
    std::vector<double> pi(pop.size());
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = 0.1 + 0.3 * static_cast<double>(i % 3);
    const auto s = draw_sample(pop, PoissonDesign{pi}, 1);
    CHECK(worst_r2_z(s, cfg, 3000, 5) < 4.5);
  }
  SUBCASE("srswor") {
    const auto s = draw_sample(pop, SrsworDesign{40}, 2);
    CHECK(worst_r2_z(s, cfg, 3000, 6) < 4.5);
  }
  SUBCASE("pps systematic") {
    std::vector<double> size(pop.size());
    for (std::size_t i = 0; i < size.size(); ++i) size[i] = 1.0 + static_cast<double>(i % 5);
    const auto s = draw_sample(pop, PpsSystematicDesign{30.0, size}, 3);
    CHECK(worst_r2_z(s, cfg, 3000, 7) < 4.5);
  }
  SUBCASE("two stage") {
    const auto s = draw_sample(pop, two_stage_for(pop, 3.0, 0.3), 4);
    CHECK(worst_r2_z(s, cfg, 3000, 8) < 4.5);
  }
  SUBCASE("two stage, floor-residual clones") {
    cfg.scheme = PseudoScheme::floor_residual;
    const auto s = draw_sample(pop, two_stage_for(pop, 3.0, 0.3), 4);
    CHECK(worst_r2_z(s, cfg, 3000, 9) < 4.5);
  }
  SUBCASE("two stage, first stage only") {
    cfg.skip_second_stage = true;
    const auto s = draw_sample(pop, two_stage_for(pop, 3.0, 0.3), 4);
    CHECK(worst_r2_z(s, cfg, 3000, 10) < 4.5);
  }
}

TEST_CASE("certainty units always get multiplier one") {
  const auto pop = test::small_population(120, 2, 6, 4);
  BootstrapConfig cfg;
  std::vector<double> pi(pop.size(), 0.3);
  for (std::size_t i = 0; i < pi.size(); i += 7) pi[i] = 1.0;
  const auto s = draw_sample(pop, PoissonDesign{pi}, 2);
  const auto census = draw_sample(pop, SrsworDesign{pop.size()}, 2);
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto m = design_resample(s, cfg, r).multipliers;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.pi[i] == 1.0) CHECK(m[i] == 1.0);
    }
    for (double v : design_resample(census, cfg, r).multipliers) CHECK(v == 1.0);
  }
}

TEST_CASE("certainty PSUs under a census second stage") {
  const auto pop = test::small_population(200, 2, 5, 9);
  auto d = two_stage_for(pop, 5.0, 1.0);  // every PSU selected, every unit kept
  const auto s = draw_sample(pop, d, 1);
  for (double p : s.pi) CHECK(p == 1.0);
  BootstrapConfig cfg;
  for (std::uint64_t r = 0; r < 50; ++r) {
    for (double v : design_resample(s, cfg, r).multipliers) CHECK(v == 1.0);
  }
}

TEST_CASE("averaging draws") {
  const auto pop = test::small_population(200, 2, 8, 2);
  const auto s = draw_sample(pop, SrsworDesign{30}, 1);
  BootstrapConfig cfg;
  std::vector<ResampleDraw> draws;
  for (std::uint64_t r = 0; r < 4; ++r) draws.push_back(design_resample(s, cfg, r));
  const auto avg = average_multipliers(draws);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double m = 0.0;
    for (const auto& d : draws) m += d.multipliers[i];
    CHECK(avg.multipliers[i] == doctest::Approx(m / 4.0));
  }
  draws.push_back(iid_multipliers(5, 1));
  CHECK_THROWS_AS(average_multipliers(draws), Error);

  cfg.average_M = 8;
  const auto a = design_resample(s, cfg, 11);
  const auto b = design_resample(s, cfg, 11);
  CHECK(a.multipliers == b.multipliers);
}

TEST_CASE("averaging reduces multiplier variance") {
  const auto pop = test::small_population(300, 3, 10, 5);
  const auto s = draw_sample(pop, two_stage_for(pop, 3.0, 0.3), 2);
  auto variance = [&](int M) {
    BootstrapConfig cfg;
    cfg.average_M = M;
    double total = 0.0;
    const int draws = 400;
    std::vector<double> sum(s.size(), 0.0), sum2(s.size(), 0.0);
    for (int r = 0; r < draws; ++r) {
      const auto m = design_resample(s, cfg, derive_seed(77, static_cast<std::uint64_t>(r))).multipliers;
      for (std::size_t i = 0; i < s.size(); ++i) {
        sum[i] += m[i];
        sum2[i] += m[i] * m[i];
      }
    }
    for (std::size_t i = 0; i < s.size(); ++i) total += sum2[i] / draws - (sum[i] / draws) * (sum[i] / draws);
    return total / static_cast<double>(s.size());
  };
  CHECK(variance(4) < variance(1));
}

TEST_CASE("pseudo population totals") {
  const auto pop = test::small_population(300, 3, 10, 6);
  const auto s = draw_sample(pop, two_stage_for(pop, 3.0, 0.3), 5);
  const auto mult = build_pseudo_population(s, PseudoScheme::multinomial, 1);
  CHECK(mult.level == PseudoPopulation::Level::psu);
  std::int64_t total = 0;
  for (auto c : mult.copies) {
    CHECK(c >= 0);
    total += c;
  }
  CHECK(total == mult.total);
  const auto fr = build_pseudo_population(s, PseudoScheme::floor_residual, 1);
  for (auto c : fr.copies) CHECK(c >= 1);
}

TEST_CASE("ingested samples without a known second stage") {
  auto pop = test::small_population(300, 3, 10, 7);
  auto s = draw_sample(pop, two_stage_for(pop, 3.0, 0.3), 5);
  s.stage2_known = false;
  BootstrapConfig cfg;
  CHECK(worst_r2_z(s, cfg, 2000, 3) < 4.5);
}
