#include "sdrf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sdrf {

KernelSpec::KernelSpec(double bandwidth, std::size_t outcome_dim, std::size_t rff_dim,
                       std::uint64_t rff_seed)
    : bandwidth_(bandwidth),
      inv_two_sigma2_(1.0 / (2.0 * bandwidth * bandwidth)),
      outcome_dim_(outcome_dim),
      rff_dim_(rff_dim),
      rff_seed_(rff_seed) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorKind::ConfigError, "kernel bandwidth must be positive and finite");
  }
  if (rff_dim % 2 != 0) {
    throw Error(ErrorKind::ConfigError, "rff_dim must be even (paired cos/sin features)");
  }
  if (rff_dim > 0) {
    frequencies_ = Matrix(rff_dim / 2, outcome_dim);
    Rng rng(rff_seed);
    std::normal_distribution<double> normal(0.0, 1.0 / bandwidth);
    for (double& v : frequencies_.data()) v = normal(rng);
  }
}

double KernelSpec::eval(std::span<const double> y, std::span<const double> z) const {
  return eval_sq(squared_distance(y, z));
}

void KernelSpec::features(std::span<const double> y, std::span<double> out) const {
  const std::size_t half = rff_dim_ / 2;
  const double scale = std::sqrt(2.0 / static_cast<double>(rff_dim_));
  for (std::size_t l = 0; l < half; ++l) {
    auto omega = frequencies_.row(l);
    double dot = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) dot += omega[k] * y[k];
    out[l] = scale * std::cos(dot);
    out[half + l] = scale * std::sin(dot);
  }
}

void WeightedDistribution::validate(double tol) const {
  if (points.rows() != weights.size()) {
    throw Error(ErrorKind::DimensionMismatch, "points/weights length differ");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::UnnormalizedInput, "negative or non-finite weight");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > tol) {
    throw Error(ErrorKind::UnnormalizedInput, "weights sum to " + std::to_string(total));
  }
}

double median_heuristic(const Matrix& points, std::size_t max_points, std::uint64_t seed) {
  if (points.rows() < 2) {
    throw Error(ErrorKind::DegenerateSample, "median heuristic needs at least two points");
  }
  std::vector<std::size_t> idx(points.rows());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > max_points) {
    Rng rng(seed);
    // partial Fisher-Yates: first max_points entries are a uniform subsample
    for (std::size_t k = 0; k < max_points; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
      std::swap(idx[k], idx[pick(rng)]);
    }
    idx.resize(max_points);
  }
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      dists.push_back(std::sqrt(squared_distance(points.row(idx[a]), points.row(idx[b]))));
    }
  }
  const std::size_t m = dists.size();
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (m % 2 == 0) {
    median = 0.5 * (median + *std::max_element(dists.begin(), mid));
  }
  if (!(median > 0.0)) {
    // the median can vanish while some distances are positive; fall back to
    // the mean positive distance so the bandwidth stays usable
    double sum = 0.0;
    std::size_t count = 0;
    for (double d : dists) {
      if (d > 0.0) {
        sum += d;
        ++count;
      }
    }
    if (count == 0) throw Error(ErrorKind::DegenerateSample, "all pairwise distances are zero");
    median = sum / static_cast<double>(count);
  }
  return median;
}

double kernel_eval(std::span<const double> y, std::span<const double> z, const KernelSpec& spec) {
  if (y.size() != z.size()) {
    throw Error(ErrorKind::DimensionMismatch, "kernel arguments differ in dimension");
  }
  return spec.eval(y, z);
}

namespace {

double weighted_gram_sum(const WeightedDistribution& a, const WeightedDistribution& b,
                         const KernelSpec& spec) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.weights[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      row += b.weights[j] * spec.eval(a.points.row(i), b.points.row(j));
    }
    s += a.weights[i] * row;
  }
  return s;
}

void check_pair(const WeightedDistribution& p, const WeightedDistribution& q) {
  p.validate(1e-9);
  q.validate(1e-9);
  if (p.dim() != q.dim()) throw Error(ErrorKind::DimensionMismatch, "outcome dimensions differ");
}

}  // namespace

double mmd2_exact(const WeightedDistribution& p, const WeightedDistribution& q,
                  const KernelSpec& spec) {
  check_pair(p, q);
  const double value = weighted_gram_sum(p, p, spec) + weighted_gram_sum(q, q, spec) -
                       2.0 * weighted_gram_sum(p, q, spec);
  return std::max(0.0, value);
}

std::vector<double> rff_features(std::span<const double> y, const KernelSpec& spec) {
  if (spec.rff_dim() == 0) throw Error(ErrorKind::ZeroDim, "rff_dim is 0");
  if (y.size() != spec.outcome_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "outcome dimension differs from kernel spec");
  }
  std::vector<double> out(spec.rff_dim());
  spec.features(y, out);
  return out;
}

FeatureMean feature_mean(const WeightedDistribution& p, const KernelSpec& spec) {
  if (spec.rff_dim() == 0) throw Error(ErrorKind::ZeroDim, "rff_dim is 0");
  if (p.dim() != spec.outcome_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "outcome dimension differs from kernel spec");
  }
  FeatureMean mean{std::vector<double>(spec.rff_dim(), 0.0), 0.0};
  std::vector<double> z(spec.rff_dim());
  for (std::size_t i = 0; i < p.size(); ++i) {
    spec.features(p.points.row(i), z);
    for (std::size_t l = 0; l < z.size(); ++l) mean.vector[l] += p.weights[i] * z[l];
    mean.total_weight += p.weights[i];
  }
  return mean;
}

double mmd2_rff(const WeightedDistribution& p, const WeightedDistribution& q,
                const KernelSpec& spec) {
  if (spec.rff_dim() == 0) throw Error(ErrorKind::ZeroDim, "rff_dim is 0");
  check_pair(p, q);
  const FeatureMean mp = feature_mean(p, spec);
  const FeatureMean mq = feature_mean(q, spec);
  double s = 0.0;
  for (std::size_t l = 0; l < mp.vector.size(); ++l) {
    const double diff = mp.vector[l] - mq.vector[l];
    s += diff * diff;
  }
  return s;
}

}  // namespace sdrf
