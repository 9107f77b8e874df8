#include "sdrf/forest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdrf {

namespace {

constexpr std::size_t kMaxCachedGram = 4096;
constexpr int kMaxRedraws = 100;

std::vector<PsuKey> distinct_psus(const SurveySample& sample) {
  std::set<PsuKey> keys;
  for (std::size_t i = 0; i < sample.size(); ++i) keys.emplace(sample.stratum[i], sample.psu[i]);
  return {keys.begin(), keys.end()};
}

// 1 for units whose PSU is listed in `side`.
std::vector<std::uint8_t> units_on_side(const SurveySample& sample, std::span<const PsuKey> side) {
  const std::set<PsuKey> keys(side.begin(), side.end());
  std::vector<std::uint8_t> on(sample.size(), 0);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    on[i] = keys.count({sample.stratum[i], sample.psu[i]}) ? 1 : 0;
  }
  return on;
}

double weight_ratio(std::span<const std::size_t> units, std::span<const double> w) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t u : units) {
    if (w[u] > 0.0) {
      lo = std::min(lo, w[u]);
      hi = std::max(hi, w[u]);
    }
  }
  return hi > 0.0 ? hi / lo : 1.0;
}

// Local state of one feature scan on the exact path.
struct ExactScan {
  std::vector<double> row_sum;  // sum_b e_b K(a, b) over the node
  double total = 0.0;           // sum_ab e_a e_b K(a, b)
};

}  // namespace

const char* to_string(WeightGuard guard) { return guard == WeightGuard::cap ? "cap" : "stop"; }

WeightGuard weight_guard_from_string(const std::string& name) {
  if (name == "cap") return WeightGuard::cap;
  if (name == "stop") return WeightGuard::stop;
  throw Error(ErrorKind::ConfigError, "unknown weight guard \"" + name + "\"");
}

ForestConfig resolve_config(const ForestConfig& cfg, const SurveySample& sample) {
  ForestConfig r = cfg;
  const std::size_t n = sample.size();
  const std::size_t p = sample.x.cols();
  if (r.num_trees < 1) throw Error(ErrorKind::ConfigError, "num_trees must be >= 1");
  if (!(r.honesty_fraction > 0.0 && r.honesty_fraction < 1.0)) {
    throw Error(ErrorKind::ConfigError, "honesty fraction q must lie in (0, 1)");
  }
  if (r.max_depth < 0) throw Error(ErrorKind::ConfigError, "max_depth must be >= 0");
  if (r.min_node_size < 0) throw Error(ErrorKind::ConfigError, "min_node_size must be >= 1");
  if (r.min_node_size == 0) {
    r.min_node_size = std::max(20, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
  }
  if (r.mtry < 0 || static_cast<std::size_t>(r.mtry) > p) {
    throw Error(ErrorKind::ConfigError, "mtry must lie in [1, p]");
  }
  if (r.mtry == 0) r.mtry = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))));
  if (r.max_weight_ratio < 0.0) throw Error(ErrorKind::ConfigError, "max_weight_ratio must be > 0");
  if (r.max_weight_ratio == 0.0) {
    const auto [lo, hi] = std::minmax_element(sample.pi.begin(), sample.pi.end());
    r.max_weight_ratio = 5.5 * (*hi / *lo);  // max w / min w = max pi / min pi
  }
  if (r.max_weight_ratio < 1.0) throw Error(ErrorKind::ConfigError, "max_weight_ratio must be >= 1");
  if (r.bandwidth < 0.0) throw Error(ErrorKind::ConfigError, "bandwidth must be > 0");
  if (r.bandwidth == 0.0) r.bandwidth = median_heuristic(sample.y);
  if (r.rff_dim < 0 || r.rff_dim % 2 != 0) throw Error(ErrorKind::ConfigError, "rff_dim must be even");
  if (r.threshold_grid < 1) throw Error(ErrorKind::ConfigError, "threshold_grid must be >= 1");
  if (r.bootstrap.average_M < 1) throw Error(ErrorKind::ConfigError, "bootstrap.average_M must be >= 1");
  return r;
}

KernelSpec make_kernel(const ForestConfig& resolved, const SurveySample& sample) {
  return KernelSpec(resolved.bandwidth, sample.y.cols(), static_cast<std::size_t>(resolved.rff_dim),
                    derive_seed(resolved.master_seed, 0x6b65726eULL));
}

HonestyPartition honesty_partition(std::span<const PsuKey> psus, double q, std::uint64_t seed) {
  if (psus.size() < 2) throw Error(ErrorKind::TooFewPSUs, "honesty needs at least two PSUs");
  Rng rng(seed);
  std::bernoulli_distribution coin(q);
  std::vector<std::uint8_t> to_split(psus.size(), 0);
  bool ok = false;
  for (int attempt = 0; attempt < kMaxRedraws && !ok; ++attempt) {
    std::size_t count = 0;
    for (auto& s : to_split) {
      s = coin(rng) ? 1 : 0;
      count += s;
    }
    ok = count > 0 && count < psus.size();
  }
  if (!ok) {
    // extreme q: move one random PSU across so both sides are nonempty
    std::uniform_int_distribution<std::size_t> pick(0, psus.size() - 1);
    const std::size_t k = pick(rng);
    const bool all_split = to_split[0] == 1;
    std::fill(to_split.begin(), to_split.end(), all_split ? 1 : 0);
    to_split[k] = all_split ? 0 : 1;
  }
  HonestyPartition part;
  for (std::size_t k = 0; k < psus.size(); ++k) {
    (to_split[k] ? part.split_psus : part.est_psus).push_back(psus[k]);
  }
  return part;
}

int Tree::leaf_of(std::span<const double> x) const {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].leaf_id;
}

int Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::vector<double> effective_weights(std::span<const double> pi, std::span<const double> multipliers,
                                      double fraction) {
  if (pi.size() != multipliers.size()) {
    throw Error(ErrorKind::DimensionMismatch, "pi and multipliers differ in length");
  }
  std::vector<double> e(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) e[i] = multipliers[i] / (fraction * pi[i]);
  return e;
}

double split_score(const NodeView& node, std::size_t feature, double threshold,
                   const KernelSpec& kernel, std::size_t min_node_size) {
  std::vector<std::size_t> left, right;
  double wl = 0.0, wr = 0.0;
  for (std::size_t u : node.units) {
    if (!(node.weights[u] > 0.0)) continue;
    if (node.x(u, feature) <= threshold) {
      left.push_back(u);
      wl += node.weights[u];
    } else {
      right.push_back(u);
      wr += node.weights[u];
    }
  }
  if (left.size() < min_node_size || right.size() < min_node_size || !(wl > 0.0) || !(wr > 0.0)) {
    throw Error(ErrorKind::InvalidSplit, "child below min_node_size or without weight");
  }
  auto child = [&](const std::vector<std::size_t>& units, double total) {
    WeightedDistribution d{node.y.select_rows(units), {}};
    d.weights.reserve(units.size());
    for (std::size_t u : units) d.weights.push_back(node.weights[u] / total);
    return d;
  };
  const auto pl = child(left, wl);
  const auto pr = child(right, wr);
  const double mmd2 = kernel.rff_dim() > 0 ? mmd2_rff(pl, pr, kernel) : mmd2_exact(pl, pr, kernel);
  const double parent = wl + wr;
  return wl * wr / (parent * parent) * mmd2;
}

SplitContext::SplitContext(const Matrix& y, const KernelSpec& kernel) : y_(y), kernel_(kernel) {
  const std::size_t n = y.rows();
  if (kernel_.rff_dim() > 0) {
    features_ = Matrix(n, kernel_.rff_dim());
    for (std::size_t i = 0; i < n; ++i) kernel_.features(y.row(i), features_.row(i));
  } else if (n <= kMaxCachedGram) {
    gram_ = Matrix(n, n);
    for (std::size_t a = 0; a < n; ++a) {
      gram_(a, a) = 1.0;
      for (std::size_t b = a + 1; b < n; ++b) {
        const double k = kernel_.eval(y.row(a), y.row(b));
        gram_(a, b) = k;
        gram_(b, a) = k;
      }
    }
  }
}

double SplitContext::gram(std::size_t a, std::size_t b) const {
  if (!gram_.empty()) return gram_(a, b);
  return kernel_.eval(y_.row(a), y_.row(b));
}

std::vector<double> candidate_thresholds(std::span<const double> sorted_values,
                                         std::span<const double> sorted_weights, int grid) {
  std::vector<double> distinct;
  std::vector<double> cum;  // cumulative weight through each distinct value
  double acc = 0.0;
  for (std::size_t k = 0; k < sorted_values.size(); ++k) {
    acc += sorted_weights[k];
    if (distinct.empty() || sorted_values[k] != distinct.back()) {
      distinct.push_back(sorted_values[k]);
      cum.push_back(acc);
    } else {
      cum.back() = acc;
    }
  }
  auto midpoint = [](double a, double b) {
    const double m = a + 0.5 * (b - a);
    return m < b ? m : a;
  };
  std::vector<double> out;
  const std::size_t m = distinct.size();
  if (m < 2) return out;
  if (grid <= 0 || m - 1 <= static_cast<std::size_t>(grid)) {
    for (std::size_t k = 0; k + 1 < m; ++k) out.push_back(midpoint(distinct[k], distinct[k + 1]));
    return out;
  }
  const double total = cum.back();
  for (int g = 1; g <= grid; ++g) {
    const double level = total * static_cast<double>(g) / static_cast<double>(grid + 1);
    const auto it = std::lower_bound(cum.begin(), cum.end(), level);
    const auto k = static_cast<std::size_t>(it - cum.begin());
    if (k + 1 >= m) continue;
    const double t = midpoint(distinct[k], distinct[k + 1]);
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

std::optional<SplitChoice> best_split(const NodeView& node, std::span<const std::size_t> features,
                                      const SplitContext& ctx, const SplitSearch& search) {
  std::vector<std::size_t> units;
  for (std::size_t u : node.units) {
    if (node.weights[u] > 0.0) units.push_back(u);
  }
  const std::size_t n = units.size();
  if (n < 2 * search.min_node_size || n < 2) return std::nullopt;
  const auto& e = node.weights;
  double total_w = 0.0;
  for (std::size_t u : units) total_w += e[u];

  // node-wide quantities independent of the feature
  ExactScan exact;
  std::vector<double> feature_total;
  std::size_t dim = 0;
  if (ctx.uses_features()) {
    dim = ctx.kernel().rff_dim();
    feature_total.assign(dim, 0.0);
    for (std::size_t u : units) {
      const auto z = ctx.features(u);
      for (std::size_t l = 0; l < dim; ++l) feature_total[l] += e[u] * z[l];
    }
  } else {
    exact.row_sum.assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b) s += e[units[b]] * ctx.gram(units[a], units[b]);
      exact.row_sum[a] = s;
      exact.total += e[units[a]] * s;
    }
  }

  std::optional<SplitChoice> best;
  std::vector<std::size_t> order(n);
  std::vector<double> vals(n), ws(n);
  std::vector<double> left_kernel(n);
  std::vector<double> left_features(dim);
  std::vector<double> suffix_min(n + 1), suffix_max(n + 1);

  std::vector<std::size_t> sorted_features(features.begin(), features.end());
  std::sort(sorted_features.begin(), sorted_features.end());
  for (std::size_t f : sorted_features) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double xa = node.x(units[a], f);
      const double xb = node.x(units[b], f);
      return xa < xb || (xa == xb && units[a] < units[b]);
    });
    for (std::size_t k = 0; k < n; ++k) {
      vals[k] = node.x(units[order[k]], f);
      ws[k] = e[units[order[k]]];
    }
    const auto thresholds = candidate_thresholds(vals, ws, search.threshold_grid);
    if (thresholds.empty()) continue;
    if (search.max_weight_ratio > 0.0) {
      suffix_min[n] = std::numeric_limits<double>::infinity();
      suffix_max[n] = 0.0;
      for (std::size_t k = n; k-- > 0;) {
        suffix_min[k] = std::min(suffix_min[k + 1], ws[k]);
        suffix_max[k] = std::max(suffix_max[k + 1], ws[k]);
      }
    }

    std::fill(left_kernel.begin(), left_kernel.end(), 0.0);
    std::fill(left_features.begin(), left_features.end(), 0.0);
    double within_left = 0.0;            // sum over L x L
    double within_right = exact.total;  // sum over R x R
    double wl = 0.0;
    double left_min = std::numeric_limits<double>::infinity();
    double left_max = 0.0;
    std::size_t pos = 0;
    for (double t : thresholds) {
      while (pos < n && vals[pos] <= t) {
        const std::size_t a = order[pos];
        const std::size_t ua = units[a];
        const double ea = e[ua];
        if (ctx.uses_features()) {
          const auto z = ctx.features(ua);
          for (std::size_t l = 0; l < dim; ++l) left_features[l] += ea * z[l];
        } else {
          const double kaa = ctx.gram(ua, ua);
          const double to_right = exact.row_sum[a] - left_kernel[a];
          within_left += 2.0 * ea * left_kernel[a] + ea * ea * kaa;
          within_right -= 2.0 * ea * to_right - ea * ea * kaa;
          for (std::size_t b = 0; b < n; ++b) left_kernel[b] += ea * ctx.gram(ua, units[b]);
        }
        wl += ea;
        left_min = std::min(left_min, ea);
        left_max = std::max(left_max, ea);
        ++pos;
      }
      const std::size_t nl = pos;
      const std::size_t nr = n - pos;
      const double wr = total_w - wl;
      if (nl < search.min_node_size || nr < search.min_node_size) continue;
      if (!(wl > 0.0) || !(wr > 0.0)) continue;
      if (search.max_weight_ratio > 0.0 &&
          (left_max / left_min > search.max_weight_ratio ||
           suffix_max[pos] / suffix_min[pos] > search.max_weight_ratio)) {
        continue;
      }
      double mmd2 = 0.0;
      if (ctx.uses_features()) {
        for (std::size_t l = 0; l < dim; ++l) {
          const double diff = left_features[l] / wl - (feature_total[l] - left_features[l]) / wr;
          mmd2 += diff * diff;
        }
      } else {
        const double cross = 0.5 * (exact.total - within_left - within_right);
        mmd2 = within_left / (wl * wl) + within_right / (wr * wr) - 2.0 * cross / (wl * wr);
      }
      mmd2 = std::max(0.0, mmd2);
      const double score = wl * wr / (total_w * total_w) * mmd2;
      if (!best || score > best->score) best = SplitChoice{static_cast<int>(f), t, score};
    }
  }
  return best;
}

std::vector<double> split_side_weights(const SurveySample& sample, const Tree& tree,
                                       const ForestConfig& resolved) {
  const auto on_split = units_on_side(sample, tree.partition.split_psus);
  std::vector<double> e(sample.size(), 0.0);
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (on_split[i] && tree.resample.multipliers[i] > 0.0) {
      e[i] = tree.resample.multipliers[i] / (resolved.honesty_fraction * sample.pi[i]);
      lowest = std::min(lowest, e[i]);
    }
  }
  if (resolved.weight_guard == WeightGuard::cap && std::isfinite(lowest)) {
    const double cap = resolved.max_weight_ratio * lowest;
    for (double& v : e) v = std::min(v, cap);
  }
  return e;
}

void populate_leaves(Tree& tree, const SurveySample& sample, double honesty_fraction) {
  // leaves numbered left to right so ids depend only on the tree's shape
  int leaves = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    TreeNode& n = tree.nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (n.is_leaf()) {
      n.leaf_id = leaves++;
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  tree.leaf_units.assign(static_cast<std::size_t>(leaves), {});
  tree.leaf_weights.assign(static_cast<std::size_t>(leaves), {});
  tree.leaf_total.assign(static_cast<std::size_t>(leaves), 0.0);
  const auto on_est = units_on_side(sample, tree.partition.est_psus);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double m = tree.resample.multipliers[i];
    if (!on_est[i] || !(m > 0.0)) continue;
    const double w = m / (sample.pi[i] * (1.0 - honesty_fraction));
    const auto leaf = static_cast<std::size_t>(tree.leaf_of(sample.x.row(i)));
    tree.leaf_units[leaf].push_back(i);
    tree.leaf_weights[leaf].push_back(w);
    tree.leaf_total[leaf] += w;
  }
}

Tree fit_tree(const SurveySample& sample, const ResampleDraw& resample,
              const HonestyPartition& partition, const ForestConfig& resolved,
              const SplitContext& ctx, std::uint64_t seed) {
  Tree tree;
  tree.partition = partition;
  tree.resample = resample;
  const auto e = split_side_weights(sample, tree, resolved);
  std::vector<std::size_t> root;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (e[i] > 0.0) root.push_back(i);
  }
  if (root.empty()) throw Error(ErrorKind::EmptySplitSide, "split side carries no weight");

  const std::size_t p = sample.x.cols();
  const auto min_node = static_cast<std::size_t>(resolved.min_node_size);
  SplitSearch search{min_node, resolved.threshold_grid,
                     resolved.weight_guard == WeightGuard::stop ? resolved.max_weight_ratio : 0.0};

  struct Pending {
    int node;
    std::vector<std::size_t> units;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back(TreeNode{});
  stack.push_back({0, std::move(root)});
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const int depth = tree.nodes[static_cast<std::size_t>(cur.node)].depth;
    if (depth >= resolved.max_depth || cur.units.size() < 2 * min_node) continue;
    if (resolved.weight_guard == WeightGuard::stop &&
        weight_ratio(cur.units, e) > resolved.max_weight_ratio) {
      continue;
    }
    // mtry features drawn per node from a node-specific stream
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cur.node)));
    std::vector<std::size_t> feats(p);
    std::iota(feats.begin(), feats.end(), 0);
    for (std::size_t k = 0; k < static_cast<std::size_t>(resolved.mtry); ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, p - 1);
      std::swap(feats[k], feats[pick(rng)]);
    }
    feats.resize(static_cast<std::size_t>(resolved.mtry));

    const NodeView view{sample.x, sample.y, cur.units, e};
    const auto choice = best_split(view, feats, ctx, search);
    if (!choice || !(choice->score > resolved.min_gain)) continue;

    std::vector<std::size_t> left, right;
    for (std::size_t u : cur.units) {
      (sample.x(u, static_cast<std::size_t>(choice->feature)) <= choice->threshold ? left : right)
          .push_back(u);
    }
    const int li = static_cast<int>(tree.nodes.size());
    const int ri = li + 1;
    TreeNode& parent = tree.nodes[static_cast<std::size_t>(cur.node)];
    parent.feature = choice->feature;
    parent.threshold = choice->threshold;
    parent.left = li;
    parent.right = ri;
    tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, -1, depth + 1});
    tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, -1, depth + 1});
    // right pushed first so the left subtree is grown first
    stack.push_back({ri, std::move(right)});
    stack.push_back({li, std::move(left)});
  }
  populate_leaves(tree, sample, resolved.honesty_fraction);
  return tree;
}

Forest fit_forest(const SurveySample& sample, const ForestConfig& config) {
  sample.validate();
  Forest forest;
  forest.config = resolve_config(config, sample);
  forest.kernel = make_kernel(forest.config, sample);
  forest.sample = sample;
  const auto psus = distinct_psus(sample);
  if (psus.size() < 2) throw Error(ErrorKind::TooFewPSUs, "forest needs at least two PSUs");

  const ForestConfig& cfg = forest.config;
  const SplitContext ctx(sample.y, forest.kernel);
  const int num_trees = cfg.num_trees;
  forest.trees.resize(static_cast<std::size_t>(num_trees));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(num_trees));

#ifdef _OPENMP
  const int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
  for (int b = 0; b < num_trees; ++b) {
    try {
      const std::uint64_t tree_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(b));
      ResampleDraw draw = cfg.resample == ResampleScheme::design_bootstrap
                              ? design_resample(sample, cfg.bootstrap, derive_seed(tree_seed, 1))
                              : iid_multipliers(sample.size(), derive_seed(tree_seed, 1));
      const auto partition = honesty_partition(psus, cfg.honesty_fraction, derive_seed(tree_seed, 2));
      forest.trees[static_cast<std::size_t>(b)] =
          fit_tree(sample, draw, partition, cfg, ctx, derive_seed(tree_seed, 3));
    } catch (...) {
      errors[static_cast<std::size_t>(b)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return forest;
}

std::vector<double> forest_weights(const Forest& forest, std::span<const double> x,
                                   std::size_t tree_limit) {
  if (x.size() != forest.sample.x.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "query has " + std::to_string(x.size()) +
                                                  " coordinates, forest expects " +
                                                  std::to_string(forest.sample.x.cols()));
  }
  std::vector<double> omega(forest.sample.size(), 0.0);
  int contributing = 0;
  const std::size_t used = tree_limit == 0 ? forest.trees.size()
                                           : std::min(tree_limit, forest.trees.size());
  for (std::size_t b = 0; b < used; ++b) {
    const Tree& tree = forest.trees[b];
    const auto leaf = static_cast<std::size_t>(tree.leaf_of(x));
    const double total = tree.leaf_total[leaf];
    if (!(total > 0.0)) continue;
    const auto& units = tree.leaf_units[leaf];
    const auto& w = tree.leaf_weights[leaf];
    for (std::size_t k = 0; k < units.size(); ++k) omega[units[k]] += w[k] / total;
    ++contributing;
  }
  if (contributing == 0) throw Error(ErrorKind::NoSupport, "no tree has est-side mass at query");
  const double scale = 1.0 / static_cast<double>(contributing);
  for (double& v : omega) v *= scale;
  return omega;
}

WeightedDistribution predict_distribution(const Forest& forest, std::span<const double> x) {
  const auto omega = forest_weights(forest, x);
  std::vector<std::size_t> support;
  WeightedDistribution d;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] > 0.0) {
      support.push_back(i);
      d.weights.push_back(omega[i]);
    }
  }
  d.points = forest.sample.y.select_rows(support);
  return d;
}

double max_node_weight_ratio(const Forest& forest) {
  double worst = 1.0;
  for (const Tree& tree : forest.trees) {
    const auto e = split_side_weights(forest.sample, tree, forest.config);
    std::vector<double> lo(tree.nodes.size(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!(e[i] > 0.0)) continue;
      int node = 0;
      while (true) {
        const auto k = static_cast<std::size_t>(node);
        lo[k] = std::min(lo[k], e[i]);
        hi[k] = std::max(hi[k], e[i]);
        if (tree.nodes[k].is_leaf()) break;
        const TreeNode& n = tree.nodes[k];
        node = forest.sample.x(i, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
      }
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (hi[k] > 0.0) worst = std::max(worst, hi[k] / lo[k]);
    }
  }
  return worst;
}

SurveySample naive_sample(const SurveySample& sample) {
  SurveySample s = sample;
  double sum_w = 0.0;
  for (double p : sample.pi) sum_w += 1.0 / p;
  const double common = std::min(1.0, static_cast<double>(sample.size()) / sum_w);
  std::fill(s.pi.begin(), s.pi.end(), common);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.stratum[i] = 1;
    s.psu[i] = static_cast<int>(i) + 1;
  }
  s.stage1_pi.clear();
  s.stage2_pi.clear();
  s.design = DesignKind::srswor;
  return s;
}

ForestConfig naive_config(const ForestConfig& config) {
  ForestConfig c = config;
  c.resample = ResampleScheme::iid_multinomial;
  c.max_weight_ratio = 0.0;
  return c;
}

}  // namespace sdrf
