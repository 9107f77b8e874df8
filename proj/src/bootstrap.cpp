#include "sdrf/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdrf {

namespace {

constexpr int kMaxRedraws = 100;

// Multinomial(total, weights / sum(weights)) via sequential conditional binomials.
std::vector<std::int64_t> multinomial(std::int64_t total, std::span<const double> weights, Rng& rng) {
  std::vector<std::int64_t> counts(weights.size(), 0);
  double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::int64_t left = total;
  for (std::size_t k = 0; k < weights.size() && left > 0; ++k) {
    if (k + 1 == weights.size() || weights[k] >= mass) {
      counts[k] = left;
      left = 0;
      break;
    }
    const double p = std::clamp(weights[k] / mass, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> binom(left, p);
    counts[k] = binom(rng);
    left -= counts[k];
    mass -= weights[k];
  }
  return counts;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t k = v.size(); k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(v[k - 1], v[pick(rng)]);
  }
}

bool is_certain(double w) { return w <= 1.0 + 1e-12; }

// Clones entities of one group by their weights. Certainty entities keep a
// single copy.
void clone_group(std::span<const std::size_t> entities, std::span<const double> weight,
                 PseudoScheme scheme, Rng& rng, PseudoPopulation& out) {
  std::vector<std::size_t> random_part;
  std::vector<double> random_w;
  for (std::size_t e : entities) {
    if (is_certain(weight[e])) {
      out.copies[e] = 1;
      out.expected_copies[e] = 1.0;
    } else {
      random_part.push_back(e);
      random_w.push_back(weight[e]);
    }
  }
  if (random_part.empty()) return;
  if (scheme == PseudoScheme::multinomial) {
    const double mass = std::accumulate(random_w.begin(), random_w.end(), 0.0);
    const auto total = static_cast<std::int64_t>(std::llround(mass));
    const auto counts = multinomial(total, random_w, rng);
    for (std::size_t k = 0; k < random_part.size(); ++k) {
      out.copies[random_part[k]] = counts[k];
      out.expected_copies[random_part[k]] = static_cast<double>(total) * random_w[k] / mass;
    }
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t k = 0; k < random_part.size(); ++k) {
      const double w = random_w[k];
      const double base = std::floor(w);
      const bool extra = unif(rng) < (w - base);
      out.copies[random_part[k]] = static_cast<std::int64_t>(base) + (extra ? 1 : 0);
      out.expected_copies[random_part[k]] = w;
    }
  }
}

// Normalizer of the selection count: E[copies] under the multinomial scheme
// (unconditional given the sample), the realized copies under floor-residual
// where every non-certainty entity keeps at least one copy.
double copy_normalizer(PseudoScheme scheme, std::int64_t copies, double expected) {
  return scheme == PseudoScheme::multinomial ? expected : static_cast<double>(copies);
}

// Selected clone counts under systematic PPS on a shuffled clone list.
std::vector<std::int64_t> systematic_on_clones(std::span<const std::size_t> entities,
                                               std::span<const std::int64_t> copies,
                                               std::span<const double> pi, Rng& rng) {
  std::vector<std::size_t> owner;
  for (std::size_t e : entities) {
    for (std::int64_t c = 0; c < copies[e]; ++c) owner.push_back(e);
  }
  std::vector<std::int64_t> selected(copies.size(), 0);
  if (owner.empty()) return selected;
  shuffle(owner, rng);
  std::vector<double> clone_pi(owner.size());
  for (std::size_t k = 0; k < owner.size(); ++k) clone_pi[k] = pi[owner[k]];
  const auto chosen = ups_systematic(clone_pi, rng);
  for (std::size_t k = 0; k < owner.size(); ++k) {
    if (chosen[k]) ++selected[owner[k]];
  }
  return selected;
}

// SRSWOR of n clones out of sum(copies); per-entity selected counts.
std::vector<std::int64_t> srswor_on_clones(std::span<const std::int64_t> copies, std::int64_t n,
                                           Rng& rng) {
  std::vector<std::size_t> owner;
  for (std::size_t e = 0; e < copies.size(); ++e) {
    for (std::int64_t c = 0; c < copies[e]; ++c) owner.push_back(e);
  }
  std::vector<std::int64_t> selected(copies.size(), 0);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)),
                                          owner.size());
  for (std::size_t k = 0; k < take; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, owner.size() - 1);
    std::swap(owner[k], owner[pick(rng)]);
    ++selected[owner[k]];
  }
  return selected;
}

std::vector<double> draw_single_stage(const PseudoPopulation& pseudo, const SurveySample& sample,
                                      Rng& rng) {
  const std::size_t n = sample.size();
  std::vector<double> mult(n, 0.0);
  std::vector<double> rho(n, 0.0);
  std::vector<std::int64_t> selected(n, 0);
  switch (sample.design) {
    case DesignKind::poisson:
      for (std::size_t i = 0; i < n; ++i) {
        rho[i] = sample.pi[i];
        if (pseudo.copies[i] == 0) continue;
        std::binomial_distribution<std::int64_t> binom(pseudo.copies[i], std::min(1.0, sample.pi[i]));
        selected[i] = sample.pi[i] >= 1.0 ? pseudo.copies[i] : binom(rng);
      }
      break;
    case DesignKind::pps_systematic: {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      selected = systematic_on_clones(all, pseudo.copies, sample.pi, rng);
      for (std::size_t i = 0; i < n; ++i) rho[i] = sample.pi[i];
      break;
    }
    case DesignKind::srswor: {
      const auto total = pseudo.total;
      const auto take = static_cast<std::int64_t>(n);
      selected = srswor_on_clones(pseudo.copies, take, rng);
      for (std::size_t i = 0; i < n; ++i) {
        rho[i] = total > 0 ? static_cast<double>(take) / static_cast<double>(total) : 0.0;
      }
      break;
    }
    case DesignKind::two_stage:
      break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (selected[i] == 0) continue;
    const double norm = copy_normalizer(pseudo.scheme, pseudo.copies[i], pseudo.expected_copies[i]);
    mult[i] = static_cast<double>(selected[i]) / (norm * rho[i]);
  }
  return mult;
}

std::vector<double> draw_two_stage(const PseudoPopulation& pseudo, const SurveySample& sample,
                                   const BootstrapConfig& config, Rng& rng) {
  const std::size_t n = sample.size();
  const std::size_t entities = pseudo.copies.size();
  std::vector<double> stage1(entities, 1.0);
  std::vector<std::vector<std::size_t>> units(entities);
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = static_cast<std::size_t>(pseudo.entity_of_unit[i]);
    stage1[e] = sample.stage1_pi[i];
    units[e].push_back(i);
  }
  // stage 1: systematic PPS over PSU clones within each stratum
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t e = 0; e < entities; ++e) groups[pseudo.entity_group[e]].push_back(e);
  std::vector<std::int64_t> psu_selected(entities, 0);
  for (const auto& [g, members] : groups) {
    const auto sel = systematic_on_clones(members, pseudo.copies, stage1, rng);
    for (std::size_t e : members) psu_selected[e] = sel[e];
  }

  std::vector<double> mult(n, 0.0);
  const bool second_stage = !config.skip_second_stage && sample.stage2_known;
  for (std::size_t e = 0; e < entities; ++e) {
    if (psu_selected[e] == 0) continue;
    const double norm = copy_normalizer(pseudo.scheme, pseudo.copies[e], pseudo.expected_copies[e]);
    const double psu_factor = 1.0 / (norm * stage1[e]);
    const auto& members = units[e];
    if (!second_stage) {
      for (std::size_t i : members) mult[i] = static_cast<double>(psu_selected[e]) * psu_factor;
      continue;
    }
    // stage 2, independently for every selected PSU clone: clone the units
    // by their stage-2 weights, then SRSWOR of the original within-PSU size
    std::vector<double> w2(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) w2[k] = 1.0 / sample.stage2_pi[members[k]];
    std::vector<std::size_t> local(members.size());
    std::iota(local.begin(), local.end(), 0);
    for (std::int64_t r = 0; r < psu_selected[e]; ++r) {
      PseudoPopulation inner;
      inner.copies.assign(members.size(), 0);
      inner.expected_copies.assign(members.size(), 0.0);
      clone_group(local, w2, pseudo.scheme, rng, inner);
      const std::int64_t inner_total =
          std::accumulate(inner.copies.begin(), inner.copies.end(), std::int64_t{0});
      const auto take = static_cast<std::int64_t>(members.size());
      const auto sel = srswor_on_clones(inner.copies, take, rng);
      const double rho = static_cast<double>(take) / static_cast<double>(inner_total);
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (sel[k] == 0) continue;
        const double inner_norm =
            copy_normalizer(pseudo.scheme, inner.copies[k], inner.expected_copies[k]);
        mult[members[k]] += static_cast<double>(sel[k]) / (inner_norm * rho) * psu_factor;
      }
    }
  }
  return mult;
}

}  // namespace

const char* to_string(PseudoScheme scheme) {
  return scheme == PseudoScheme::multinomial ? "multinomial" : "floor_residual";
}

PseudoScheme pseudo_scheme_from_string(const std::string& name) {
  if (name == "multinomial") return PseudoScheme::multinomial;
  if (name == "floor_residual") return PseudoScheme::floor_residual;
  throw Error(ErrorKind::ConfigError, "unknown bootstrap.scheme \"" + name + "\"");
}

const char* to_string(ResampleScheme scheme) {
  return scheme == ResampleScheme::design_bootstrap ? "design_bootstrap" : "iid_multinomial";
}

ResampleScheme resample_scheme_from_string(const std::string& name) {
  if (name == "design_bootstrap") return ResampleScheme::design_bootstrap;
  if (name == "iid_multinomial") return ResampleScheme::iid_multinomial;
  throw Error(ErrorKind::ConfigError, "unknown resample scheme \"" + name + "\"");
}

PseudoPopulation build_pseudo_population(const SurveySample& sample, PseudoScheme scheme,
                                         std::uint64_t seed) {
  for (double p : sample.pi) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidWeights, "weights must satisfy w = 1/pi >= 1");
    }
  }
  Rng rng(seed);
  PseudoPopulation pseudo;
  pseudo.scheme = scheme;
  std::vector<double> weight;
  if (sample.design == DesignKind::two_stage) {
    if (sample.stage1_pi.size() != sample.size()) {
      throw Error(ErrorKind::IncompatibleDesign, "two-stage sample lacks stage-1 probabilities");
    }
    pseudo.level = PseudoPopulation::Level::psu;
    auto [cluster, count] = cluster_index(sample.stratum, sample.psu);
    pseudo.entity_of_unit = std::move(cluster);
    weight.assign(static_cast<std::size_t>(count), 1.0);
    pseudo.entity_group.assign(static_cast<std::size_t>(count), 0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const auto e = static_cast<std::size_t>(pseudo.entity_of_unit[i]);
      weight[e] = 1.0 / sample.stage1_pi[i];
      pseudo.entity_group[e] = sample.stratum[i];
    }
  } else {
    pseudo.level = PseudoPopulation::Level::unit;
    pseudo.entity_of_unit.resize(sample.size());
    std::iota(pseudo.entity_of_unit.begin(), pseudo.entity_of_unit.end(), 0);
    weight = sample.weights();
    pseudo.entity_group.assign(sample.size(), 0);
  }
  for (double w : weight) {
    if (!(w >= 1.0 - 1e-12)) throw Error(ErrorKind::InvalidWeights, "weight below one");
  }
  pseudo.copies.assign(weight.size(), 0);
  pseudo.expected_copies.assign(weight.size(), 0.0);
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t e = 0; e < weight.size(); ++e) groups[pseudo.entity_group[e]].push_back(e);
  for (const auto& [g, members] : groups) {
    clone_group(members, weight, scheme, rng, pseudo);
    std::int64_t t = 0;
    for (std::size_t e : members) t += pseudo.copies[e];
    pseudo.group_totals[g] = t;
    pseudo.total += t;
  }
  return pseudo;
}

ResampleDraw draw_multipliers(const PseudoPopulation& pseudo, const SurveySample& sample,
                              const BootstrapConfig& config, std::uint64_t seed) {
  if (pseudo.entity_of_unit.size() != sample.size()) {
    throw Error(ErrorKind::MismatchedDraws, "pseudo population built for a different sample");
  }
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    auto mult = sample.design == DesignKind::two_stage ? draw_two_stage(pseudo, sample, config, rng)
                                                       : draw_single_stage(pseudo, sample, rng);
    if (std::any_of(mult.begin(), mult.end(), [](double m) { return m > 0.0; })) {
      return {std::move(mult), ResampleScheme::design_bootstrap, seed};
    }
  }
  throw Error(ErrorKind::DegenerateDraw, "all multipliers zero after 100 redraws");
}

ResampleDraw average_multipliers(std::span<const ResampleDraw> draws) {
  if (draws.empty()) throw Error(ErrorKind::MismatchedDraws, "no draws to average");
  const std::size_t n = draws.front().multipliers.size();
  ResampleDraw out{std::vector<double>(n, 0.0), draws.front().scheme, draws.front().seed};
  for (const auto& d : draws) {
    if (d.multipliers.size() != n || d.scheme != out.scheme) {
      throw Error(ErrorKind::MismatchedDraws, "draws differ in unit set or scheme");
    }
    for (std::size_t i = 0; i < n; ++i) out.multipliers[i] += d.multipliers[i];
  }
  if (draws.size() > 1) {
    const double m = static_cast<double>(draws.size());
    for (double& v : out.multipliers) v /= m;
  }
  return out;
}

ResampleDraw iid_multipliers(std::size_t n_s, std::uint64_t seed) {
  if (n_s == 0) throw Error(ErrorKind::DegenerateDraw, "empty sample");
  Rng rng(seed);
  std::vector<double> mult(n_s, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, n_s - 1);
  for (std::size_t k = 0; k < n_s; ++k) mult[pick(rng)] += 1.0;
  return {std::move(mult), ResampleScheme::iid_multinomial, seed};
}

ResampleDraw design_resample(const SurveySample& sample, const BootstrapConfig& config,
                             std::uint64_t seed) {
  const int m = std::max(1, config.average_M);
  std::vector<ResampleDraw> draws;
  draws.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(r));
    const auto pseudo = build_pseudo_population(sample, config.scheme, derive_seed(s, 1));
    draws.push_back(draw_multipliers(pseudo, sample, config, derive_seed(s, 2)));
  }
  auto out = average_multipliers(draws);
  out.seed = seed;
  return out;
}

}  // namespace sdrf
