#pragma once

// Slow, direct implementations kept as test oracles and as the serial
// baseline of the benchmark target.

#include <optional>
#include <span>
#include <vector>

#include "sdrf/forest.hpp"

namespace sdrf::reference {

// Split score from the double-sum definition of MMD^2 over the two Hajek
// normalized children, without any incremental bookkeeping. Returns nullopt
// where split_score would throw.
std::optional<double> split_score_naive(const NodeView& node, std::size_t feature, double threshold,
                                        const KernelSpec& kernel, std::size_t min_node_size);

// Scores every candidate threshold of every feature with split_score_naive.
// Same candidates, ratio guard and tie rule as best_split.
std::optional<SplitChoice> best_split_exhaustive(const NodeView& node, std::span<const std::size_t> features,
                                                 const KernelSpec& kernel, const SplitSearch& search);

// Forest weights recomputed from the tree structure: every est-side unit is
// routed down each tree rather than read from the cached leaf lists.
std::vector<double> forest_weights_naive(const Forest& forest, std::span<const double> x);

// fit_forest on one thread.
Forest fit_forest_serial(const SurveySample& sample, const ForestConfig& config);

}  // namespace sdrf::reference
