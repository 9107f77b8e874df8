#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdrf/common.hpp"
#include "sdrf/kernel.hpp"

namespace sdrf {

// The universe of N units. Stratum labels are 1..H, PSU labels are unique
// within a stratum.
struct FinitePopulation {
  Matrix x;
  Matrix y;
  std::vector<double> z;
  std::vector<int> stratum;
  std::vector<int> psu;

  std::size_t size() const noexcept { return x.rows(); }
  void validate() const;
};

using PsuKey = std::pair<int, int>;  // (stratum, psu)

struct PoissonDesign {
  std::vector<double> pi;
};

struct SrsworDesign {
  std::size_t n = 0;
};

// Fixed-size PPS via systematic selection on a randomly permuted frame.
struct PpsSystematicDesign {
  double target_n = 0.0;
  std::vector<double> size_measure;
};

// Stratified two-stage design: PPS-systematic selection of PSUs per stratum
// with expected count expected_psus[h-1], then SRSWOR of
// ceil(stage2_fraction * N_hj) units within each selected PSU.
struct TwoStageDesign {
  std::vector<double> expected_psus;
  std::map<PsuKey, double> psu_size;
  double stage2_fraction = 0.3;
};

using DesignSpec = std::variant<PoissonDesign, SrsworDesign, PpsSystematicDesign, TwoStageDesign>;

enum class DesignKind { poisson, srswor, pps_systematic, two_stage };

const char* to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

// Selected units plus design metadata. Covariates and outcomes of the
// selected units are carried along so a sample is self-contained.
struct SurveySample {
  std::vector<std::size_t> ids;
  std::vector<double> pi;
  std::vector<int> stratum;
  std::vector<int> psu;
  // Per selected unit; filled for two-stage samples only.
  std::vector<double> stage1_pi;
  std::vector<double> stage2_pi;
  Matrix x;
  Matrix y;
  std::size_t population_size = 0;
  DesignKind design = DesignKind::poisson;
  // False when the within-PSU design is unknown (ingested files without
  // stage-1 probabilities); the bootstrap then resamples whole PSUs only.
  bool stage2_known = true;

  std::size_t size() const noexcept { return pi.size(); }
  std::vector<double> weights() const;
  void validate() const;
};

// Dense 0-based cluster index per unit from (stratum, psu) labels, ordered by
// the label pair. Returns the per-unit index and the number of clusters.
std::pair<std::vector<int>, int> cluster_index(std::span<const int> stratum,
                                               std::span<const int> psu);

struct DesignDiagnostics {
  double lln_gap = 0.0;
  double n_eff = 0.0;
  double pi_min = 0.0;
  double pi_max = 0.0;
  double sampling_fraction = 0.0;
};

// Madow systematic selection. Units with pi = 1 are always selected.
std::vector<std::uint8_t> ups_systematic(std::span<const double> pi, Rng& rng);
std::vector<std::uint8_t> ups_systematic(std::span<const double> pi, std::uint64_t seed);

// pi_k = min(1, n * m_k / sum m), re-solved over the non-certainty units
// until no probability exceeds one, so the expected count stays n.
std::vector<double> pps_inclusion(std::span<const double> size_measure, double n);

SurveySample draw_sample(const FinitePopulation& pop, const DesignSpec& design, std::uint64_t seed);

// Hajek-normalized law over members with weights m_i / pi_i (m_i = 1 when no
// multipliers are given). Zero-weight members are dropped.
WeightedDistribution hajek_distribution(const SurveySample& sample,
                                        std::span<const std::size_t> members,
                                        std::span<const double> multipliers = {});

DesignDiagnostics design_diagnostics(const SurveySample& sample, std::size_t population_size);

// Kish effective sample size of a weight vector.
double kish_n_eff(std::span<const double> weights);

// CSV ingestion. Required columns: y1..yd, x1..xp, w (or weight), stratum,
// psu. An optional pi1 column carries first-stage PSU probabilities.
SurveySample read_sample_csv(const std::string& path);
void write_sample_csv(const std::string& path, const SurveySample& sample);
void write_population_csv(const std::string& path, const FinitePopulation& pop);

}  // namespace sdrf
