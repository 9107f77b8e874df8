#include "sdrf/reference.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace sdrf::reference {

std::optional<double> split_score_naive(const NodeView& node, std::size_t feature, double threshold,
                                        const KernelSpec& kernel, std::size_t min_node_size) {
  std::vector<std::size_t> left, right;
  double wl = 0.0, wr = 0.0;
  for (std::size_t u : node.units) {
    const double w = node.weights[u];
    if (!(w > 0.0)) continue;
    if (node.x(u, feature) <= threshold) {
      left.push_back(u);
      wl += w;
    } else {
      right.push_back(u);
      wr += w;
    }
  }
  if (left.size() < min_node_size || right.size() < min_node_size || !(wl > 0.0) || !(wr > 0.0)) {
    return std::nullopt;
  }
  auto sum = [&](const std::vector<std::size_t>& a, double na, const std::vector<std::size_t>& b, double nb) {
    double s = 0.0;
    for (std::size_t i : a) {
      for (std::size_t j : b) {
        s += (node.weights[i] / na) * (node.weights[j] / nb) * kernel.eval(node.y.row(i), node.y.row(j));
      }
    }
    return s;
  };
  const double mmd2 = sum(left, wl, left, wl) + sum(right, wr, right, wr) - 2.0 * sum(left, wl, right, wr);
  const double parent = wl + wr;
  return wl * wr / (parent * parent) * std::max(0.0, mmd2);
}

std::optional<SplitChoice> best_split_exhaustive(const NodeView& node, std::span<const std::size_t> features,
                                                 const KernelSpec& kernel, const SplitSearch& search) {
  std::vector<std::size_t> units;
  for (std::size_t u : node.units) {
    if (node.weights[u] > 0.0) units.push_back(u);
  }
  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());
  std::optional<SplitChoice> best;
  for (std::size_t f : sorted_features) {
    std::vector<std::size_t> order = units;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return node.x(a, f) < node.x(b, f) || (node.x(a, f) == node.x(b, f) && a < b);
    });
    std::vector<double> vals, ws;
    for (std::size_t u : order) {
      vals.push_back(node.x(u, f));
      ws.push_back(node.weights[u]);
    }
    for (double t : candidate_thresholds(vals, ws, search.threshold_grid)) {
      if (search.max_weight_ratio > 0.0) {
        double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;
        double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
        for (std::size_t u : order) {
          const double w = node.weights[u];
          if (node.x(u, f) <= t) {
            lmin = std::min(lmin, w);
            lmax = std::max(lmax, w);
          } else {
            rmin = std::min(rmin, w);
            rmax = std::max(rmax, w);
          }
        }
        if (lmax / lmin > search.max_weight_ratio || rmax / rmin > search.max_weight_ratio) continue;
      }
      const auto score = split_score_naive(node, f, t, kernel, search.min_node_size);
      if (score && (!best || *score > best->score)) best = SplitChoice{static_cast<int>(f), t, *score};
    }
  }
  return best;
}

std::vector<double> forest_weights_naive(const Forest& forest, std::span<const double> x) {
  const SurveySample& s = forest.sample;
  const double q = forest.config.honesty_fraction;
  std::vector<double> omega(s.size(), 0.0);
  int contributing = 0;
  for (const Tree& tree : forest.trees) {
    const std::set<PsuKey> est(tree.partition.est_psus.begin(), tree.partition.est_psus.end());
    const int target = tree.leaf_of(x);
    std::vector<double> w(s.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!est.count({s.stratum[i], s.psu[i]})) continue;
      if (tree.leaf_of(s.x.row(i)) != target) continue;
      w[i] = tree.resample.multipliers[i] / (s.pi[i] * (1.0 - q));
      total += w[i];
    }
    if (!(total > 0.0)) continue;
    for (std::size_t i = 0; i < s.size(); ++i) omega[i] += w[i] / total;
    ++contributing;
  }
  if (contributing == 0) throw Error(ErrorKind::NoSupport, "no tree has est-side mass at query");
  for (double& v : omega) v /= contributing;
  return omega;
}

Forest fit_forest_serial(const SurveySample& sample, const ForestConfig& config) {
  ForestConfig c = config;
  c.workers = 1;
  return fit_forest(sample, c);
}

}  // namespace sdrf::reference
