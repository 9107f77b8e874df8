#include "sdrf/survey.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "sdrf/io.hpp"

namespace sdrf {

namespace {

constexpr int kMaxRedraws = 100;

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  // explicit Fisher-Yates keeps draws identical across standard libraries
  for (std::size_t k = idx.size(); k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(idx[k - 1], idx[pick(rng)]);
  }
}

// First `count` entries of a random permutation of 0..n-1.
std::vector<std::size_t> choose_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

void check_probabilities(std::span<const double> pi, const char* what) {
  for (double p : pi) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::IncompatibleDesign,
                  std::string(what) + ": probabilities must lie in (0, 1]");
    }
  }
}

SurveySample make_sample(const FinitePopulation& pop, std::vector<std::size_t> ids,
                         std::vector<double> pi, DesignKind kind) {
  SurveySample s;
  s.x = pop.x.select_rows(ids);
  s.y = pop.y.select_rows(ids);
  s.stratum.reserve(ids.size());
  s.psu.reserve(ids.size());
  for (std::size_t id : ids) {
    s.stratum.push_back(pop.stratum.empty() ? 1 : pop.stratum[id]);
    s.psu.push_back(pop.psu.empty() ? static_cast<int>(id) + 1 : pop.psu[id]);
  }
  s.ids = std::move(ids);
  s.pi = std::move(pi);
  s.population_size = pop.size();
  s.design = kind;
  return s;
}

SurveySample draw_poisson(const FinitePopulation& pop, const PoissonDesign& d, Rng& rng) {
  if (d.pi.size() != pop.size()) {
    throw Error(ErrorKind::IncompatibleDesign, "poisson: pi length differs from population size");
  }
  check_probabilities(d.pi, "poisson");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> ids;
  std::vector<double> pi;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (d.pi[i] >= 1.0 || unif(rng) < d.pi[i]) {
      ids.push_back(i);
      pi.push_back(d.pi[i]);
    }
  }
  if (ids.empty()) throw Error(ErrorKind::EmptySelection, "poisson draw selected no units");
  return make_sample(pop, std::move(ids), std::move(pi), DesignKind::poisson);
}

SurveySample draw_srswor(const FinitePopulation& pop, const SrsworDesign& d, Rng& rng) {
  if (d.n == 0 || d.n > pop.size()) {
    throw Error(ErrorKind::IncompatibleDesign, "srswor: n must lie in [1, N]");
  }
  auto ids = choose_without_replacement(pop.size(), d.n, rng);
  std::sort(ids.begin(), ids.end());
  std::vector<double> pi(ids.size(), static_cast<double>(d.n) / static_cast<double>(pop.size()));
  return make_sample(pop, std::move(ids), std::move(pi), DesignKind::srswor);
}

// Systematic selection over a random permutation; returns selected positions.
std::vector<std::size_t> permuted_systematic(std::span<const double> pi, Rng& rng) {
  std::vector<std::size_t> order(pi.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle_indices(order, rng);
  std::vector<double> permuted(pi.size());
  for (std::size_t k = 0; k < order.size(); ++k) permuted[k] = pi[order[k]];
  const auto chosen = ups_systematic(permuted, rng);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (chosen[k]) out.push_back(order[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SurveySample draw_pps(const FinitePopulation& pop, const PpsSystematicDesign& d, Rng& rng) {
  if (d.size_measure.size() != pop.size()) {
    throw Error(ErrorKind::IncompatibleDesign, "pps: size measure length differs from N");
  }
  const auto pi_all = pps_inclusion(d.size_measure, d.target_n);
  auto ids = permuted_systematic(pi_all, rng);
  if (ids.empty()) throw Error(ErrorKind::EmptySelection, "pps draw selected no units");
  std::vector<double> pi;
  for (std::size_t id : ids) pi.push_back(pi_all[id]);
  return make_sample(pop, std::move(ids), std::move(pi), DesignKind::pps_systematic);
}

std::size_t second_stage_count(double fraction, std::size_t cluster_size) {
  // guard against 0.3 * 10 = 3.0000000000000004 rounding up to 4
  const double raw = fraction * static_cast<double>(cluster_size);
  auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(n, 1, cluster_size);
}

SurveySample draw_two_stage(const FinitePopulation& pop, const TwoStageDesign& d, Rng& rng) {
  if (pop.stratum.size() != pop.size() || pop.psu.size() != pop.size()) {
    throw Error(ErrorKind::IncompatibleDesign, "two_stage: population lacks stratum/psu labels");
  }
  if (!(d.stage2_fraction > 0.0 && d.stage2_fraction <= 1.0)) {
    throw Error(ErrorKind::IncompatibleDesign, "two_stage: stage2_fraction must lie in (0, 1]");
  }
  std::map<PsuKey, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < pop.size(); ++i) members[{pop.stratum[i], pop.psu[i]}].push_back(i);

  std::map<int, std::vector<PsuKey>> by_stratum;
  for (const auto& [key, units] : members) by_stratum[key.first].push_back(key);

  std::vector<std::size_t> ids;
  std::vector<double> pi, pi1, pi2;
  for (const auto& [h, keys] : by_stratum) {
    if (h < 1 || static_cast<std::size_t>(h) > d.expected_psus.size()) {
      throw Error(ErrorKind::IncompatibleDesign,
                  "two_stage: no expected PSU count for stratum " + std::to_string(h));
    }
    std::vector<double> mos;
    for (const auto& key : keys) {
      auto it = d.psu_size.find(key);
      if (it == d.psu_size.end()) {
        throw Error(ErrorKind::IncompatibleDesign, "two_stage: missing size measure for PSU (" +
                                                       std::to_string(key.first) + ", " +
                                                       std::to_string(key.second) + ")");
      }
      mos.push_back(it->second);
    }
    const auto stage1 = pps_inclusion(mos, d.expected_psus[static_cast<std::size_t>(h - 1)]);
    const auto chosen = permuted_systematic(stage1, rng);
    if (chosen.empty()) {
      throw Error(ErrorKind::EmptySelection, "stratum " + std::to_string(h) + " selected no PSU");
    }
    for (std::size_t c : chosen) {
      const auto& units = members.at(keys[c]);
      const std::size_t n2 = second_stage_count(d.stage2_fraction, units.size());
      const double p2 = static_cast<double>(n2) / static_cast<double>(units.size());
      for (std::size_t pos : choose_without_replacement(units.size(), n2, rng)) {
        ids.push_back(units[pos]);
        pi1.push_back(stage1[c]);
        pi2.push_back(p2);
        pi.push_back(stage1[c] * p2);
      }
    }
  }
  // order by frame id
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  std::vector<std::size_t> sid;
  std::vector<double> spi, spi1, spi2;
  for (std::size_t k : order) {
    sid.push_back(ids[k]);
    spi.push_back(pi[k]);
    spi1.push_back(pi1[k]);
    spi2.push_back(pi2[k]);
  }
  SurveySample s = make_sample(pop, std::move(sid), std::move(spi), DesignKind::two_stage);
  s.stage1_pi = std::move(spi1);
  s.stage2_pi = std::move(spi2);
  return s;
}

}  // namespace

const char* to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::poisson: return "poisson";
    case DesignKind::srswor: return "srswor";
    case DesignKind::pps_systematic: return "pps_systematic";
    case DesignKind::two_stage: return "two_stage";
  }
  return "unknown";
}

DesignKind design_kind_from_string(const std::string& name) {
  if (name == "poisson") return DesignKind::poisson;
  if (name == "srswor") return DesignKind::srswor;
  if (name == "pps_systematic") return DesignKind::pps_systematic;
  if (name == "two_stage") return DesignKind::two_stage;
  throw Error(ErrorKind::ConfigError, "unknown design kind \"" + name + "\"");
}

void FinitePopulation::validate() const {
  const std::size_t n = x.rows();
  if (y.rows() != n || (!z.empty() && z.size() != n) || stratum.size() != n || psu.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "population arrays differ in length");
  }
  for (int h : stratum) {
    if (h < 1) throw Error(ErrorKind::IncompatibleDesign, "stratum labels must be >= 1");
  }
}

std::vector<double> SurveySample::weights() const {
  std::vector<double> w(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) w[i] = 1.0 / pi[i];
  return w;
}

void SurveySample::validate() const {
  const std::size_t n = pi.size();
  if (x.rows() != n || y.rows() != n || stratum.size() != n || psu.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "sample arrays differ in length");
  }
  if (design == DesignKind::two_stage && stage1_pi.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "two-stage sample lacks stage-1 probabilities");
  }
  for (double p : pi) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::InvalidWeights, "inclusion probabilities must lie in (0, 1]");
    }
  }
}

std::pair<std::vector<int>, int> cluster_index(std::span<const int> stratum,
                                               std::span<const int> psu) {
  std::map<PsuKey, int> ids;
  for (std::size_t i = 0; i < stratum.size(); ++i) ids.emplace(PsuKey{stratum[i], psu[i]}, 0);
  int next = 0;
  for (auto& [key, id] : ids) id = next++;
  std::vector<int> out(stratum.size());
  for (std::size_t i = 0; i < stratum.size(); ++i) out[i] = ids.at({stratum[i], psu[i]});
  return {out, next};
}

std::vector<std::uint8_t> ups_systematic(std::span<const double> pi, Rng& rng) {
  for (double p : pi) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::IncompatibleDesign, "ups_systematic: probabilities must lie in [0, 1]");
    }
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double start = unif(rng);
  std::vector<std::uint8_t> selected(pi.size(), 0);
  double cum = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const double lo = cum;
    cum += pi[k];
    if (pi[k] >= 1.0) {
      selected[k] = 1;
    } else if (pi[k] > 0.0) {
      selected[k] = std::floor(cum - start) > std::floor(lo - start) ? 1 : 0;
    }
  }
  return selected;
}

std::vector<std::uint8_t> ups_systematic(std::span<const double> pi, std::uint64_t seed) {
  Rng rng(seed);
  return ups_systematic(pi, rng);
}

std::vector<double> pps_inclusion(std::span<const double> size_measure, double n) {
  const std::size_t count = size_measure.size();
  if (!(n > 0.0) || n > static_cast<double>(count)) {
    throw Error(ErrorKind::IncompatibleDesign, "pps: expected count must lie in (0, #units]");
  }
  for (double m : size_measure) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw Error(ErrorKind::IncompatibleDesign, "pps: size measures must be positive");
    }
  }
  std::vector<double> pi(count, 0.0);
  std::vector<std::uint8_t> certain(count, 0);
  while (true) {
    double remaining_n = n;
    double remaining_m = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      if (certain[k]) {
        remaining_n -= 1.0;
      } else {
        remaining_m += size_measure[k];
      }
    }
    bool changed = false;
    for (std::size_t k = 0; k < count; ++k) {
      if (certain[k]) {
        pi[k] = 1.0;
        continue;
      }
      pi[k] = remaining_n * size_measure[k] / remaining_m;
      if (pi[k] >= 1.0) {
        certain[k] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (double& p : pi) p = std::min(1.0, p);
  return pi;
}

SurveySample draw_sample(const FinitePopulation& pop, const DesignSpec& design, std::uint64_t seed) {
  pop.validate();
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    try {
      return std::visit(
          [&](const auto& d) -> SurveySample {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PoissonDesign>) return draw_poisson(pop, d, rng);
            if constexpr (std::is_same_v<T, SrsworDesign>) return draw_srswor(pop, d, rng);
            if constexpr (std::is_same_v<T, PpsSystematicDesign>) return draw_pps(pop, d, rng);
            if constexpr (std::is_same_v<T, TwoStageDesign>) return draw_two_stage(pop, d, rng);
          },
          design);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptySelection) throw;
    }
  }
  throw Error(ErrorKind::EmptySelection, "no valid draw after 100 attempts");
}

WeightedDistribution hajek_distribution(const SurveySample& sample,
                                        std::span<const std::size_t> members,
                                        std::span<const double> multipliers) {
  if (!multipliers.empty() && multipliers.size() != sample.size()) {
    throw Error(ErrorKind::DimensionMismatch, "multipliers length differs from sample size");
  }
  std::vector<std::size_t> kept;
  std::vector<double> w;
  double total = 0.0;
  for (std::size_t i : members) {
    const double m = multipliers.empty() ? 1.0 : multipliers[i];
    if (!(m >= 0.0)) throw Error(ErrorKind::InvalidWeights, "negative multiplier");
    const double wi = m / sample.pi[i];
    if (wi > 0.0) {
      kept.push_back(i);
      w.push_back(wi);
      total += wi;
    }
  }
  if (kept.empty()) throw Error(ErrorKind::EmptyRegion, "no member carries positive weight");
  for (double& v : w) v /= total;
  return {sample.y.select_rows(kept), std::move(w)};
}

double kish_n_eff(std::span<const double> weights) {
  double s = 0.0;
  double s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

DesignDiagnostics design_diagnostics(const SurveySample& sample, std::size_t population_size) {
  DesignDiagnostics d;
  const auto w = sample.weights();
  const double n_big = static_cast<double>(population_size);
  const double sum_w = std::accumulate(w.begin(), w.end(), 0.0);
  if (sample.design == DesignKind::srswor && sample.population_size > 0) {
    // n copies of N/n: the total is the frame size exactly, so take it in
    // integer arithmetic instead of summing rounded reciprocals
    d.lln_gap = (static_cast<double>(sample.population_size) - n_big) / n_big;
  } else {
    d.lln_gap = (sum_w - n_big) / n_big;
  }
  d.n_eff = kish_n_eff(w);
  // Kish n_eff can exceed n_s by rounding when all weights are equal
  d.n_eff = std::min(d.n_eff, static_cast<double>(sample.size()));
  d.pi_min = *std::min_element(sample.pi.begin(), sample.pi.end());
  d.pi_max = *std::max_element(sample.pi.begin(), sample.pi.end());
  d.sampling_fraction = static_cast<double>(sample.size()) / n_big;
  return d;
}

namespace {

// Columns named prefix1..prefixK, in order; stops at the first gap.
std::vector<int> numbered_columns(const io::CsvTable& t, const std::string& prefix) {
  std::vector<int> cols;
  for (int k = 1;; ++k) {
    const int c = t.column(prefix + std::to_string(k));
    if (c < 0) break;
    cols.push_back(c);
  }
  return cols;
}

int required_column(const io::CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  if (c < 0) throw Error(ErrorKind::SchemaError, "missing required column \"" + name + "\"");
  return c;
}

}  // namespace

SurveySample read_sample_csv(const std::string& path) {
  const auto table = io::read_csv(path);
  const auto ycols = numbered_columns(table, "y");
  const auto xcols = numbered_columns(table, "x");
  if (ycols.empty()) throw Error(ErrorKind::SchemaError, "missing required column \"y1\"");
  if (xcols.empty()) throw Error(ErrorKind::SchemaError, "missing required column \"x1\"");
  int wcol = table.column("w");
  if (wcol < 0) wcol = table.column("weight");
  if (wcol < 0) throw Error(ErrorKind::SchemaError, "missing required column \"w\"");
  const int scol = required_column(table, "stratum");
  const int pcol = required_column(table, "psu");
  const int pi1col = table.column("pi1");
  const int idcol = table.column("id");

  SurveySample s;
  s.x = Matrix(table.rows.size(), xcols.size());
  s.y = Matrix(table.rows.size(), ycols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 1;
    for (std::size_t k = 0; k < xcols.size(); ++k) {
      s.x(r, k) = io::parse_double(row[static_cast<std::size_t>(xcols[k])],
                                   table.header[static_cast<std::size_t>(xcols[k])], line);
    }
    for (std::size_t k = 0; k < ycols.size(); ++k) {
      s.y(r, k) = io::parse_double(row[static_cast<std::size_t>(ycols[k])],
                                   table.header[static_cast<std::size_t>(ycols[k])], line);
    }
    const double w = io::parse_double(row[static_cast<std::size_t>(wcol)], "w", line);
    if (!(w >= 1.0)) {
      throw Error(ErrorKind::InvalidWeights,
                  "column \"w\" row " + std::to_string(line) + ": weight below 1 (pi > 1)");
    }
    s.pi.push_back(1.0 / w);
    s.stratum.push_back(
        static_cast<int>(io::parse_integer(row[static_cast<std::size_t>(scol)], "stratum", line)));
    s.psu.push_back(
        static_cast<int>(io::parse_integer(row[static_cast<std::size_t>(pcol)], "psu", line)));
    s.ids.push_back(idcol >= 0 ? static_cast<std::size_t>(io::parse_integer(
                                     row[static_cast<std::size_t>(idcol)], "id", line))
                               : r);
    if (pi1col >= 0) {
      const double p1 = io::parse_double(row[static_cast<std::size_t>(pi1col)], "pi1", line);
      if (!(p1 > 0.0 && p1 <= 1.0) || p1 < s.pi.back() * (1.0 - 1e-12)) {
        throw Error(ErrorKind::SchemaError,
                    "column \"pi1\" row " + std::to_string(line) + ": must lie in [pi, 1]");
      }
      s.stage1_pi.push_back(p1);
    }
  }
  if (s.pi.empty()) throw Error(ErrorKind::SchemaError, path + ": no data rows");
  s.design = DesignKind::two_stage;
  s.population_size = 0;
  if (pi1col >= 0) {
    for (std::size_t i = 0; i < s.size(); ++i) s.stage2_pi.push_back(std::min(1.0, s.pi[i] / s.stage1_pi[i]));
    s.stage2_known = true;
  } else {
    // Stage-1 probability of each PSU approximated by its mean unit weight.
    const auto [cluster, count] = cluster_index(s.stratum, s.psu);
    std::vector<double> sum(static_cast<std::size_t>(count), 0.0), num(static_cast<std::size_t>(count), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      sum[static_cast<std::size_t>(cluster[i])] += 1.0 / s.pi[i];
      num[static_cast<std::size_t>(cluster[i])] += 1.0;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto c = static_cast<std::size_t>(cluster[i]);
      s.stage1_pi.push_back(std::min(1.0, num[c] / sum[c]));
      s.stage2_pi.push_back(1.0);
    }
    s.stage2_known = false;
  }
  double sum_w = 0.0;
  for (double p : s.pi) sum_w += 1.0 / p;
  s.population_size = static_cast<std::size_t>(std::llround(sum_w));
  return s;
}

void write_sample_csv(const std::string& path, const SurveySample& sample) {
  std::ostringstream out;
  out << "id";
  for (std::size_t k = 0; k < sample.y.cols(); ++k) out << ",y" << k + 1;
  for (std::size_t k = 0; k < sample.x.cols(); ++k) out << ",x" << k + 1;
  out << ",w,stratum,psu";
  const bool with_pi1 = sample.design == DesignKind::two_stage && sample.stage2_known &&
                        sample.stage1_pi.size() == sample.size();
  if (with_pi1) out << ",pi1";
  out << '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out << sample.ids[i];
    for (double v : sample.y.row(i)) out << ',' << io::format_double(v);
    for (double v : sample.x.row(i)) out << ',' << io::format_double(v);
    out << ',' << io::format_double(1.0 / sample.pi[i]) << ',' << sample.stratum[i] << ','
        << sample.psu[i];
    if (with_pi1) out << ',' << io::format_double(sample.stage1_pi[i]);
    out << '\n';
  }
  io::atomic_write(path, out.str());
}

void write_population_csv(const std::string& path, const FinitePopulation& pop) {
  std::ostringstream out;
  out << "id";
  for (std::size_t k = 0; k < pop.y.cols(); ++k) out << ",y" << k + 1;
  for (std::size_t k = 0; k < pop.x.cols(); ++k) out << ",x" << k + 1;
  out << ",z,stratum,psu\n";
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out << i;
    for (double v : pop.y.row(i)) out << ',' << io::format_double(v);
    for (double v : pop.x.row(i)) out << ',' << io::format_double(v);
    out << ',' << io::format_double(pop.z.empty() ? 0.0 : pop.z[i]) << ',' << pop.stratum[i]
        << ',' << pop.psu[i] << '\n';
  }
  io::atomic_write(path, out.str());
}

}  // namespace sdrf
