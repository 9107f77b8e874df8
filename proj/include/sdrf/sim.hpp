#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdrf/forest.hpp"
#include "sdrf/survey.hpp"

namespace sdrf {

struct SimConfig {
  std::size_t N = 5000;
  std::size_t p = 3;
  int H = 10;
  int psus_per_stratum = 100;
  double psus_selected_per_stratum = 20.0;  // n_h, expected PSUs drawn per stratum
  double second_stage_fraction = 0.3;
  bool zero_signal = false;                 // mu == 0 variant
  std::vector<int> trees = {30};            // B values, evaluated as prefixes of one forest
  std::vector<std::uint64_t> seeds = {1};
  ForestConfig forest;
  int mmd_points = 50;
  int truth_draws = 2000;
  int rmse_grid = 200;
  bool include_naive = true;
  int workers = 0;                          // seeds run in parallel; 0: OpenMP default

  void validate() const;
};

// Calibrated (H, PSUs per stratum, n_h) for the four population sizes of the
// benchmark; other N get H = 10 with five units per PSU and n_h = 20% of PSUs.
SimConfig sim_preset(std::size_t N);

FinitePopulation generate_population(const SimConfig& cfg, std::uint64_t seed);

// mu(x, z) of the benchmark model; zero under the null variant.
std::array<double, 2> dgp_mean(std::span<const double> x, double z, bool zero_signal = false);

// mu(x, z) + Sigma^{1/2} eps with Sigma = [[1, 0.3], [0.3, 1]].
std::array<double, 2> draw_outcome(std::span<const double> x, double z, bool zero_signal, Rng& rng);

// 8 if the PSU mean of Z is positive, 2 otherwise.
double measure_of_size(double mean_z);
std::map<PsuKey, double> psu_measures(const FinitePopulation& pop);

TwoStageDesign survey_design_for(const FinitePopulation& pop, const SimConfig& cfg);
SurveySample apply_survey(const FinitePopulation& pop, const SimConfig& cfg, std::uint64_t seed);

// Y | X = x with Z integrated out: N(a(x), Sigma + b(x) b(x)^T).
struct GaussianLaw {
  std::vector<double> mean;
  Matrix covariance;

  Matrix sample(std::size_t n, Rng& rng) const;
};

GaussianLaw true_conditional(std::span<const double> x, bool zero_signal = false);

// E[Y1 | X1 = x1] under the super-population.
double true_marginal_mean(double x1, bool zero_signal = false);

// Forest estimate of E[Y | X = x], identical to cond_mean(predict_distribution)
// but computed from per-leaf means. Entry k is the estimate using the first
// prefixes[k] trees.
class ForestMean {
 public:
  explicit ForestMean(const Forest& forest);
  std::vector<double> mean(std::span<const double> x, std::size_t tree_limit = 0) const;
  // Component c at each prefix length.
  std::vector<double> prefix_means(std::span<const double> x, std::size_t component,
                                   std::span<const int> prefixes) const;

 private:
  const Forest& forest_;
  std::size_t dim_;
  // leaf_mean_[b][leaf * dim + c]; NaN for empty leaves
  std::vector<std::vector<double>> leaf_mean_;
};

// Covariate completions used to marginalize a forest over x2..xp at fixed
// x1: x2 = +-1 crossed with standard normal quantile points for x3..xp.
Matrix marginal_completions(std::size_t p, int normal_points = 5);

struct MetricRow {
  std::uint64_t seed = 0;
  std::string method;
  std::size_t N = 0;
  int B = 0;
  std::size_t n_s = 0;
  double mmd100 = 0.0;
  double rmse = 0.0;
};

struct AggregateRow {
  std::string method;
  std::size_t N = 0;
  int B = 0;
  std::size_t seeds = 0;
  double n_s_mean = 0.0;
  double mmd_mean = 0.0;
  double mmd_sd = 0.0;
  double rmse_mean = 0.0;
  double rmse_sd = 0.0;
};

struct PointwiseRow {
  std::string method;
  std::size_t N = 0;
  int B = 0;
  double x1 = 0.0;
  double mse = 0.0;
  double sd = 0.0;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct MetricsReport {
  std::vector<MetricRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<PointwiseRow> pointwise;
  std::vector<SeedFailure> failures;
};

MetricsReport run_experiment(const SimConfig& cfg);

void write_metrics_csv(const std::string& path, const MetricsReport& report);
void write_pointwise_csv(const std::string& path, const MetricsReport& report);

}  // namespace sdrf
