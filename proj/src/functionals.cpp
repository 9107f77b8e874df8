#include "sdrf/functionals.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdrf {

std::vector<double> cond_mean(const WeightedDistribution& dist) {
  std::vector<double> mu(dist.dim(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto y = dist.points.row(i);
    for (std::size_t k = 0; k < mu.size(); ++k) mu[k] += dist.weights[i] * y[k];
  }
  return mu;
}

Matrix cond_cov(const WeightedDistribution& dist) {
  const std::size_t d = dist.dim();
  Matrix cov(d, d);
  if (dist.size() < 2) return cov;
  const auto mu = cond_mean(dist);
  std::vector<double> c(d);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto y = dist.points.row(i);
    for (std::size_t k = 0; k < d; ++k) c[k] = y[k] - mu[k];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) cov(a, b) += dist.weights[i] * c[a] * c[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) cov(a, b) = cov(b, a);
  }
  return cov;
}

ConditionalSummary summarize(const WeightedDistribution& dist) {
  ConditionalSummary s;
  s.mean = cond_mean(dist);
  s.covariance = cond_cov(dist);
  s.support_size = dist.size();
  s.degenerate = dist.size() < 2;
  return s;
}

double cond_cdf(const WeightedDistribution& dist, std::span<const double> y) {
  if (y.size() != dist.dim()) throw Error(ErrorKind::DimensionMismatch, "cdf argument dimension");
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto p = dist.points.row(i);
    bool below = true;
    for (std::size_t k = 0; k < y.size() && below; ++k) below = p[k] <= y[k];
    if (below) total += dist.weights[i];
  }
  return std::min(1.0, total);
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double tau) {
  if (values.empty()) throw Error(ErrorKind::EmptyRegion, "quantile of an empty sample");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = tau * total;
  // relative slack so that e.g. three weights of 1/3 reach tau = 2/3
  const double slack = 1e-12 * total;
  double cum = 0.0;
  for (std::size_t k : order) {
    cum += weights[k];
    if (cum >= target - slack) return values[k];
  }
  return values[order.back()];
}

double cond_quantile(const WeightedDistribution& dist, std::size_t component, double tau) {
  if (component >= dist.dim()) throw Error(ErrorKind::DimensionMismatch, "quantile component");
  std::vector<double> v(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) v[i] = dist.points(i, component);
  return weighted_quantile(v, dist.weights, tau);
}

double default_ridge(const Matrix& covariance) {
  double trace = 0.0;
  for (std::size_t k = 0; k < covariance.rows(); ++k) trace += covariance(k, k);
  return 1e-8 * trace / static_cast<double>(std::max<std::size_t>(1, covariance.rows()));
}

double mahalanobis_score(const ConditionalSummary& summary, std::span<const double> y, double ridge) {
  const std::size_t d = summary.mean.size();
  if (y.size() != d) throw Error(ErrorKind::DimensionMismatch, "score argument dimension");
  Eigen::MatrixXd cov(d, d);
  Eigen::VectorXd diff(d);
  for (std::size_t a = 0; a < d; ++a) {
    diff(static_cast<Eigen::Index>(a)) = y[a] - summary.mean[a];
    for (std::size_t b = 0; b < d; ++b) {
      cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = summary.covariance(a, b);
    }
    cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += ridge;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularCovariance, "covariance not positive definite after ridge");
  }
  const double s = diff.dot(llt.solve(diff));
  return std::max(0.0, s);
}

RegionQuery region_query(const Forest& forest, std::span<const double> x, double ridge_factor) {
  RegionQuery q;
  q.summary = summarize(predict_distribution(forest, x));
  double trace = 0.0;
  for (std::size_t k = 0; k < q.summary.covariance.rows(); ++k) trace += q.summary.covariance(k, k);
  q.ridge = ridge_factor * trace / static_cast<double>(q.summary.mean.size());
  if (!(q.ridge > 0.0)) q.ridge = ridge_factor;
  return q;
}

std::vector<double> training_scores(const Forest& forest, double ridge_factor) {
  const auto& s = forest.sample;
  std::vector<double> scores(s.size());
  for (std::size_t a = 0; a < s.size(); ++a) {
    const auto q = region_query(forest, s.x.row(a), ridge_factor);
    scores[a] = mahalanobis_score(q.summary, s.y.row(a), q.ridge);
  }
  return scores;
}

ToleranceRegion tolerance_threshold(const Forest& forest, double alpha, double ridge_factor) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::ConfigError, "alpha must lie in (0, 1)");
  const auto scores = training_scores(forest, ridge_factor);
  const auto w = forest.sample.weights();
  return {alpha, weighted_quantile(scores, w, 1.0 - alpha), ridge_factor};
}

bool tolerance_contains(const ToleranceRegion& region, const Forest& forest,
                        std::span<const double> x, std::span<const double> y) {
  const auto q = region_query(forest, x, region.ridge_factor);
  return mahalanobis_score(q.summary, y, q.ridge) <= region.threshold;
}

double mmd_to_reference(const WeightedDistribution& dist, const WeightedDistribution& reference,
                        const KernelSpec& kernel) {
  return std::sqrt(mmd2_exact(dist, reference, kernel));
}

}  // namespace sdrf
