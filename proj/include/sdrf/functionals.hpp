#pragma once

#include <span>
#include <vector>

#include "sdrf/forest.hpp"
#include "sdrf/kernel.hpp"

namespace sdrf {

struct ConditionalSummary {
  std::vector<double> mean;
  Matrix covariance;
  std::size_t support_size = 0;
  bool degenerate = false;  // single support point: covariance set to zero
};

std::vector<double> cond_mean(const WeightedDistribution& dist);

// Weighted covariance sum w_i (y_i - mu)(y_i - mu)^T; the zero matrix for a
// single support point.
Matrix cond_cov(const WeightedDistribution& dist);

ConditionalSummary summarize(const WeightedDistribution& dist);

// P(Y <= y componentwise).
double cond_cdf(const WeightedDistribution& dist, std::span<const double> y);

// Left-continuous weighted inverse of coordinate `component`: the smallest
// support value whose cumulative sorted weight reaches tau.
double cond_quantile(const WeightedDistribution& dist, std::size_t component, double tau);

// Same convention for a plain weighted sample; weights need not be normalized.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double tau);

// ridge * I is added to the covariance before inversion.
double mahalanobis_score(const ConditionalSummary& summary, std::span<const double> y, double ridge);

// 1e-8 * trace / d.
double default_ridge(const Matrix& covariance);

struct ToleranceRegion {
  double alpha = 0.1;
  double threshold = 0.0;
  // Ridge used per query is ridge_factor * trace(cov) / d.
  double ridge_factor = 1e-8;
};

struct RegionQuery {
  ConditionalSummary summary;
  double ridge = 0.0;
};

RegionQuery region_query(const Forest& forest, std::span<const double> x, double ridge_factor = 1e-8);

// Score of every training unit at its own covariates.
std::vector<double> training_scores(const Forest& forest, double ridge_factor = 1e-8);

// Global threshold: survey-weighted (1 - alpha) quantile of the training scores.
ToleranceRegion tolerance_threshold(const Forest& forest, double alpha, double ridge_factor = 1e-8);

bool tolerance_contains(const ToleranceRegion& region, const Forest& forest,
                        std::span<const double> x, std::span<const double> y);

double mmd_to_reference(const WeightedDistribution& dist, const WeightedDistribution& reference,
                        const KernelSpec& kernel);

}  // namespace sdrf
