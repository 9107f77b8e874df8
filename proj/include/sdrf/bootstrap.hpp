#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdrf/survey.hpp"

namespace sdrf {

enum class PseudoScheme { multinomial, floor_residual };
enum class ResampleScheme { design_bootstrap, iid_multinomial };

const char* to_string(PseudoScheme scheme);
PseudoScheme pseudo_scheme_from_string(const std::string& name);
const char* to_string(ResampleScheme scheme);
ResampleScheme resample_scheme_from_string(const std::string& name);

struct BootstrapConfig {
  PseudoScheme scheme = PseudoScheme::multinomial;
  bool skip_second_stage = false;
  int average_M = 1;
};

// Clones of the sampled units (single-stage designs) or of the sampled PSUs
// (two-stage designs, cloned within each stratum by their stage-1 weights).
struct PseudoPopulation {
  enum class Level { unit, psu };

  Level level = Level::unit;
  PseudoScheme scheme = PseudoScheme::multinomial;
  // Per cloned entity (unit or PSU); entity_of_unit maps sample units to them.
  std::vector<std::int64_t> copies;
  // E[copies | sample]; the multipliers are normalized by it under the
  // multinomial scheme so that E[n*_i | sample] = 1 holds exactly.
  std::vector<double> expected_copies;
  std::vector<int> entity_of_unit;
  std::vector<int> entity_group;  // stratum group of each entity
  std::int64_t total = 0;
  std::map<int, std::int64_t> group_totals;
};

struct ResampleDraw {
  std::vector<double> multipliers;
  ResampleScheme scheme = ResampleScheme::design_bootstrap;
  std::uint64_t seed = 0;
};

PseudoPopulation build_pseudo_population(const SurveySample& sample, PseudoScheme scheme,
                                         std::uint64_t seed);

// Re-applies the sample's design to the pseudo population and converts the
// per-unit selection counts into multipliers with conditional mean one.
ResampleDraw draw_multipliers(const PseudoPopulation& pseudo, const SurveySample& sample,
                              const BootstrapConfig& config, std::uint64_t seed);

ResampleDraw average_multipliers(std::span<const ResampleDraw> draws);

// Efron bootstrap counts: Multinomial(n_s, uniform).
ResampleDraw iid_multipliers(std::size_t n_s, std::uint64_t seed);

// One design-bootstrap draw per call: average_M independent
// (pseudo population, re-sample) pairs averaged.
ResampleDraw design_resample(const SurveySample& sample, const BootstrapConfig& config,
                             std::uint64_t seed);

}  // namespace sdrf
