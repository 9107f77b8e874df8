#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdrf/bootstrap.hpp"
#include "sdrf/kernel.hpp"
#include "sdrf/survey.hpp"

namespace sdrf {

// How the maximum weight ratio is enforced on the split side of a tree.
//   cap:  effective weights are capped at ratio * (smallest positive weight)
//         before growth, so every node satisfies the bound.
//   stop: weights are left alone; a node breaching the bound is not split and
//         candidate splits producing a breaching child are rejected.
enum class WeightGuard { cap, stop };

const char* to_string(WeightGuard guard);
WeightGuard weight_guard_from_string(const std::string& name);

struct ForestConfig {
  int num_trees = 100;
  double honesty_fraction = 0.5;  // q: probability a PSU goes to the split side
  int max_depth = 8;
  int min_node_size = 0;          // 0: max(20, ceil(sqrt(n_s)))
  double max_weight_ratio = 0.0;  // 0: 5.5 * max(w) / min(w)
  WeightGuard weight_guard = WeightGuard::cap;
  int mtry = 0;                   // 0: max(1, ceil(sqrt(p)))
  double bandwidth = 0.0;         // 0: median heuristic on the sample outcomes
  int rff_dim = 0;                // 0: exact MMD in the split criterion
  int threshold_grid = 64;
  double min_gain = 1e-12;
  ResampleScheme resample = ResampleScheme::design_bootstrap;
  BootstrapConfig bootstrap;
  std::uint64_t master_seed = 0;
  int workers = 0;  // 0: OpenMP default
};

// Copy of cfg with every automatic (0) hyperparameter replaced by its
// data-driven value for this sample.
ForestConfig resolve_config(const ForestConfig& cfg, const SurveySample& sample);

KernelSpec make_kernel(const ForestConfig& resolved, const SurveySample& sample);

struct HonestyPartition {
  std::vector<PsuKey> split_psus;
  std::vector<PsuKey> est_psus;
};

// Assigns each distinct PSU to the split side with probability q.
HonestyPartition honesty_partition(std::span<const PsuKey> psus, double q, std::uint64_t seed);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_id = -1;
  int depth = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  HonestyPartition partition;
  ResampleDraw resample;
  // Est-side units per leaf with weights n*_i / (pi_i (1 - q)), and totals.
  std::vector<std::vector<std::size_t>> leaf_units;
  std::vector<std::vector<double>> leaf_weights;
  std::vector<double> leaf_total;

  int leaf_of(std::span<const double> x) const;
  int num_leaves() const noexcept { return static_cast<int>(leaf_units.size()); }
  int depth() const;
};

struct Forest {
  ForestConfig config;  // resolved
  KernelSpec kernel;
  SurveySample sample;
  std::vector<Tree> trees;
};

// Per-unit view of a node for split scoring. weights are indexed by sample
// unit (effective weights n*_i / (q pi_i)); units lists the node members.
struct NodeView {
  const Matrix& x;
  const Matrix& y;
  std::span<const std::size_t> units;
  std::span<const double> weights;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

std::vector<double> effective_weights(std::span<const double> pi, std::span<const double> multipliers,
                                      double fraction);

// (N_L N_R / N_Pa^2) * MMD^2(P_L, P_R) for the split x_j <= t. Throws
// InvalidSplit when a child has fewer than min_node_size units or no weight.
double split_score(const NodeView& node, std::size_t feature, double threshold,
                   const KernelSpec& kernel, std::size_t min_node_size);

// Precomputed outcome-side quantities shared by all trees of a forest: the
// Gram matrix of the sample (exact path) or its Fourier features.
class SplitContext {
 public:
  SplitContext(const Matrix& y, const KernelSpec& kernel);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  bool uses_features() const noexcept { return kernel_.rff_dim() > 0; }
  double gram(std::size_t a, std::size_t b) const;
  std::span<const double> features(std::size_t i) const { return features_.row(i); }

 private:
  Matrix y_;
  KernelSpec kernel_;
  Matrix gram_;  // empty when the sample is too large to cache
  Matrix features_;
};

struct SplitSearch {
  std::size_t min_node_size = 1;
  int threshold_grid = 64;
  double max_weight_ratio = 0.0;  // > 0 rejects children breaching the ratio
};

// Candidate thresholds on one feature: midpoints between consecutive distinct
// values, thinned to at most `grid` weighted-quantile midpoints.
std::vector<double> candidate_thresholds(std::span<const double> sorted_values,
                                         std::span<const double> sorted_weights, int grid);

// Best split over the given features by incremental scans. Returns nullopt
// when no candidate is valid.
std::optional<SplitChoice> best_split(const NodeView& node, std::span<const std::size_t> features,
                                      const SplitContext& ctx, const SplitSearch& search);

Tree fit_tree(const SurveySample& sample, const ResampleDraw& resample,
              const HonestyPartition& partition, const ForestConfig& resolved,
              const SplitContext& ctx, std::uint64_t seed);

Forest fit_forest(const SurveySample& sample, const ForestConfig& config);

// Rebuilds leaf membership of the est side; used after loading a forest.
void populate_leaves(Tree& tree, const SurveySample& sample, double honesty_fraction);

// tree_limit > 0 restricts the ensemble to its first tree_limit trees; since
// tree b depends only on (master_seed, b) that prefix is itself the forest
// fitted with num_trees = tree_limit.
std::vector<double> forest_weights(const Forest& forest, std::span<const double> x,
                                   std::size_t tree_limit = 0);

WeightedDistribution predict_distribution(const Forest& forest, std::span<const double> x);

// Post-fit audit of the weight-ratio guard: the largest within-node ratio of
// positive effective split weights over every node of every tree (root of a
// single-leaf tree included).
double max_node_weight_ratio(const Forest& forest);

// Units on the split side of a tree with positive multiplier, and their
// effective (possibly capped) weights, indexed by sample unit.
std::vector<double> split_side_weights(const SurveySample& sample, const Tree& tree,
                                       const ForestConfig& resolved);

// Naive baseline: equal weights, unit-level honesty, i.i.d. multipliers.
SurveySample naive_sample(const SurveySample& sample);
ForestConfig naive_config(const ForestConfig& config);

}  // namespace sdrf
