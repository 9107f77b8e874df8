#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sdrf/common.hpp"

namespace sdrf {

// Gaussian RBF kernel k(y, y') = exp(-|y - y'|^2 / (2 sigma^2)) on R^d, with an
// optional random Fourier feature map of dimension rff_dim (paired cos/sin).
// The frequencies are drawn once at construction, so a spec can be shared
// read-only by every tree and every thread.
class KernelSpec {
 public:
  KernelSpec() = default;
  KernelSpec(double bandwidth, std::size_t outcome_dim, std::size_t rff_dim = 0,
             std::uint64_t rff_seed = 0);

  double bandwidth() const noexcept { return bandwidth_; }
  std::size_t outcome_dim() const noexcept { return outcome_dim_; }
  std::size_t rff_dim() const noexcept { return rff_dim_; }
  std::uint64_t rff_seed() const noexcept { return rff_seed_; }

  // rff_dim/2 x d frequency matrix, rows ~ N(0, sigma^-2 I_d).
  const Matrix& frequencies() const noexcept { return frequencies_; }

  double eval(std::span<const double> y, std::span<const double> z) const;
  double eval_sq(double squared_dist) const { return std::exp(-squared_dist * inv_two_sigma2_); }

  // Writes the rff_dim features of y into out.
  void features(std::span<const double> y, std::span<double> out) const;

 private:
  double bandwidth_ = 1.0;
  double inv_two_sigma2_ = 0.5;
  std::size_t outcome_dim_ = 0;
  std::size_t rff_dim_ = 0;
  std::uint64_t rff_seed_ = 0;
  Matrix frequencies_;
};

// Outcome points with nonnegative weights summing to one.
struct WeightedDistribution {
  Matrix points;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::size_t dim() const noexcept { return points.cols(); }

  // Throws UnnormalizedInput / DimensionMismatch when the invariants fail.
  void validate(double tol = 1e-12) const;
};

struct FeatureMean {
  std::vector<double> vector;
  double total_weight = 0.0;
};

// Median of pairwise Euclidean distances. Above max_points the points are
// subsampled uniformly without replacement with a fixed seed.
double median_heuristic(const Matrix& points, std::size_t max_points = 2000,
                        std::uint64_t seed = 0x5eed);

double kernel_eval(std::span<const double> y, std::span<const double> z, const KernelSpec& spec);

double mmd2_exact(const WeightedDistribution& p, const WeightedDistribution& q,
                  const KernelSpec& spec);

std::vector<double> rff_features(std::span<const double> y, const KernelSpec& spec);

FeatureMean feature_mean(const WeightedDistribution& p, const KernelSpec& spec);

double mmd2_rff(const WeightedDistribution& p, const WeightedDistribution& q,
                const KernelSpec& spec);

}  // namespace sdrf
