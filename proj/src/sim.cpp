#include "sdrf/sim.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <omp.h>
#include <sstream>

#include "sdrf/io.hpp"

namespace sdrf {

namespace {

constexpr double kRho = 0.3;

void draw_covariates(std::size_t p, Rng& rng, std::span<double> x) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  x[0] = unif(rng);
  if (p > 1) x[1] = coin(rng) ? 1.0 : -1.0;
  for (std::size_t k = 2; k < p; ++k) x[k] = normal(rng);
}

// Lower Cholesky factor of a small SPD matrix.
Matrix cholesky(const Matrix& a) {
  const std::size_t d = a.rows();
  Matrix l(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0)) throw Error(ErrorKind::SingularCovariance, "covariance not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double a : v) ss += (a - m) * (a - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct MethodResult {
  std::string method;
  std::size_t n_s = 0;
  std::vector<double> mmd100;               // per B
  std::vector<double> rmse;                 // per B
  std::vector<std::vector<double>> curve;   // per B, per grid point
};

struct SeedResult {
  bool ok = false;
  std::string error;
  std::vector<MethodResult> methods;
};

// Outcome-side evaluation data shared by both methods of one seed.
struct MmdTarget {
  Matrix points;                    // held-out covariates
  std::vector<Matrix> truth;        // draws per point
};

MmdTarget make_mmd_target(const SimConfig& cfg, std::uint64_t seed) {
  MmdTarget t;
  t.points = Matrix(static_cast<std::size_t>(cfg.mmd_points), cfg.p);
  Rng rng(derive_seed(seed, 0x686f6c64));
  for (std::size_t i = 0; i < t.points.rows(); ++i) draw_covariates(cfg.p, rng, t.points.row(i));
  for (std::size_t i = 0; i < t.points.rows(); ++i) {
    Rng draw_rng(derive_seed(seed, 0x74727574, i));
    t.truth.push_back(true_conditional(t.points.row(i), cfg.zero_signal)
                          .sample(static_cast<std::size_t>(cfg.truth_draws), draw_rng));
  }
  return t;
}

// Kernel quantities that depend only on the bandwidth: the sample Gram
// matrix, the cross means g[t][i] = mean_j k(y_i, z_tj) and the truth
// self-similarity qq[t].
struct MmdCache {
  double bandwidth = 0.0;
  Matrix gram;
  std::vector<std::vector<double>> cross;
  std::vector<double> qq;
};

MmdCache make_mmd_cache(const MmdTarget& target, const Matrix& y, const KernelSpec& kernel) {
  MmdCache c;
  c.bandwidth = kernel.bandwidth();
  const std::size_t n = y.rows();
  c.gram = Matrix(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    c.gram(a, a) = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      c.gram(a, b) = c.gram(b, a) = kernel.eval(y.row(a), y.row(b));
    }
  }
  for (const Matrix& z : target.truth) {
    const std::size_t m = z.rows();
    std::vector<double> g(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += kernel.eval(y.row(a), z.row(j));
      g[a] = s / static_cast<double>(m);
    }
    c.cross.push_back(std::move(g));
    double off = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = j + 1; l < m; ++l) off += kernel.eval(z.row(j), z.row(l));
    }
    c.qq.push_back((static_cast<double>(m) + 2.0 * off) / (static_cast<double>(m) * static_cast<double>(m)));
  }
  return c;
}

double mmd_at(const MmdCache& cache, std::size_t t, const std::vector<double>& omega) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] > 0.0) support.push_back(i);
  }
  double pp = 0.0;
  double pq = 0.0;
  for (std::size_t a : support) {
    double row = 0.0;
    for (std::size_t b : support) row += omega[b] * cache.gram(a, b);
    pp += omega[a] * row;
    pq += omega[a] * cache.cross[t][a];
  }
  return std::sqrt(std::max(0.0, pp - 2.0 * pq + cache.qq[t]));
}

MethodResult evaluate(const std::string& method, const Forest& forest, const SimConfig& cfg,
                      const MmdTarget& target, const MmdCache& cache) {
  MethodResult r;
  r.method = method;
  r.n_s = forest.sample.size();
  const std::size_t nb = cfg.trees.size();

  r.mmd100.assign(nb, 0.0);
  for (std::size_t t = 0; t < target.points.rows(); ++t) {
    for (std::size_t k = 0; k < nb; ++k) {
      const auto omega = forest_weights(forest, target.points.row(t), static_cast<std::size_t>(cfg.trees[k]));
      r.mmd100[k] += mmd_at(cache, t, omega);
    }
  }
  for (double& v : r.mmd100) v *= 100.0 / static_cast<double>(target.points.rows());

  const ForestMean fm(forest);
  const Matrix completions = marginal_completions(cfg.p);
  const auto grid = static_cast<std::size_t>(cfg.rmse_grid);
  r.curve.assign(nb, std::vector<double>(grid, 0.0));
  std::vector<double> x(cfg.p);
  for (std::size_t g = 0; g < grid; ++g) {
    const double x1 = grid == 1 ? 0.5 : static_cast<double>(g) / static_cast<double>(grid - 1);
    for (std::size_t c = 0; c < completions.rows(); ++c) {
      std::copy(completions.row(c).begin(), completions.row(c).end(), x.begin());
      x[0] = x1;
      const auto est = fm.prefix_means(x, 0, cfg.trees);
      for (std::size_t k = 0; k < nb; ++k) r.curve[k][g] += est[k];
    }
    for (std::size_t k = 0; k < nb; ++k) r.curve[k][g] /= static_cast<double>(completions.rows());
  }
  r.rmse.assign(nb, 0.0);
  for (std::size_t k = 0; k < nb; ++k) {
    double se = 0.0;
    for (std::size_t g = 0; g < grid; ++g) {
      const double x1 = grid == 1 ? 0.5 : static_cast<double>(g) / static_cast<double>(grid - 1);
      const double e = r.curve[k][g] - true_marginal_mean(x1, cfg.zero_signal);
      se += e * e;
    }
    r.rmse[k] = std::sqrt(se / static_cast<double>(grid));
  }
  return r;
}

SeedResult run_seed(const SimConfig& cfg, std::uint64_t seed) {
  SeedResult out;
  const FinitePopulation pop = generate_population(cfg, derive_seed(seed, 1));
  const SurveySample sample = apply_survey(pop, cfg, derive_seed(seed, 2));
  const int max_b = *std::max_element(cfg.trees.begin(), cfg.trees.end());

  ForestConfig fc = cfg.forest;
  fc.num_trees = max_b;
  fc.workers = 1;
  fc.master_seed = derive_seed(seed, 3, cfg.forest.master_seed);
  const Forest sdrf = fit_forest(sample, fc);

  const MmdTarget target = make_mmd_target(cfg, derive_seed(seed, 4));
  const MmdCache cache = make_mmd_cache(target, sample.y, sdrf.kernel);
  out.methods.push_back(evaluate("sdrf", sdrf, cfg, target, cache));

  if (cfg.include_naive) {
    const Forest drf = fit_forest(naive_sample(sample), naive_config(fc));
    if (drf.kernel.bandwidth() == cache.bandwidth) {
      out.methods.push_back(evaluate("drf", drf, cfg, target, cache));
    } else {
      out.methods.push_back(evaluate("drf", drf, cfg, target, make_mmd_cache(target, sample.y, drf.kernel)));
    }
  }
  out.ok = true;
  return out;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
  if (p < 2) fail("p must be at least 2");
  if (H < 1 || psus_per_stratum < 1) fail("H and psus_per_stratum must be positive");
  if (N < static_cast<std::size_t>(H) * static_cast<std::size_t>(psus_per_stratum)) {
    fail("N must be at least H * psus_per_stratum");
  }
  if (!(psus_selected_per_stratum >= 1.0)) fail("psus_selected_per_stratum must be at least 1");
  if (!(second_stage_fraction > 0.0 && second_stage_fraction <= 1.0)) {
    fail("second_stage_fraction must lie in (0, 1]");
  }
  if (trees.empty()) fail("trees must list at least one forest size");
  for (int b : trees) {
    if (b < 1) fail("tree counts must be positive");
  }
  if (seeds.empty()) fail("seeds must not be empty");
  if (mmd_points < 1 || truth_draws < 1 || rmse_grid < 1) fail("evaluation sizes must be positive");
}

SimConfig sim_preset(std::size_t N) {
  SimConfig c;
  c.N = N;
  // Five units per PSU; each selected PSU then contributes ceil(0.3 * 5) = 2
  // units, so n_h = n_s / (2 H) reproduces the benchmark's mean sample sizes.
  switch (N) {
    case 4000: c.H = 10; c.psus_per_stratum = 80; c.psus_selected_per_stratum = 16; break;
    case 5000: c.H = 10; c.psus_per_stratum = 100; c.psus_selected_per_stratum = 20; break;
    case 15000: c.H = 15; c.psus_per_stratum = 200; c.psus_selected_per_stratum = 40; break;
    case 22500: c.H = 15; c.psus_per_stratum = 300; c.psus_selected_per_stratum = 60; break;
    default:
      c.H = 10;
      c.psus_per_stratum = std::max(1, static_cast<int>(std::lround(static_cast<double>(N) / 50.0)));
      c.psus_selected_per_stratum = 0.2 * c.psus_per_stratum;
  }
  return c;
}

FinitePopulation generate_population(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = cfg.N;
  FinitePopulation pop;
  pop.x = Matrix(n, cfg.p);
  pop.y = Matrix(n, 2);
  pop.z.resize(n);
  pop.stratum.resize(n);
  pop.psu.resize(n);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> strat(1, cfg.H);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = normal(rng);
    auto x = pop.x.row(i);
    draw_covariates(cfg.p, rng, x);
    const auto y = draw_outcome(x, z, cfg.zero_signal, rng);
    pop.y(i, 0) = y[0];
    pop.y(i, 1) = y[1];
    pop.z[i] = z;
    pop.stratum[i] = strat(rng);
  }

  for (int h = 1; h <= cfg.H; ++h) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (pop.stratum[i] == h) members.push_back(i);
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return pop.x(a, 0) < pop.x(b, 0) || (pop.x(a, 0) == pop.x(b, 0) && a < b);
    });
    const std::size_t nh = members.size();
    const auto bins = static_cast<std::size_t>(cfg.psus_per_stratum);
    for (std::size_t r = 0; r < nh; ++r) {
      pop.psu[members[r]] = static_cast<int>(r * bins / nh) + 1;
    }
  }
  return pop;
}

std::array<double, 2> dgp_mean(std::span<const double> x, double z, bool zero_signal) {
  if (zero_signal) return {0.0, 0.0};
  return {1.5 * x[1] + (2.0 + 50.0 * z) * x[0], 1.5 * x[1] - z * (3.0 * x[1] + 1.0)};
}

std::array<double, 2> draw_outcome(std::span<const double> x, double z, bool zero_signal, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double e1 = normal(rng);
  const double e2 = normal(rng);
  const auto mu = dgp_mean(x, z, zero_signal);
  return {mu[0] + e1, mu[1] + kRho * e1 + std::sqrt(1.0 - kRho * kRho) * e2};
}

double measure_of_size(double mean_z) { return mean_z > 0.0 ? 8.0 : 2.0; }

std::map<PsuKey, double> psu_measures(const FinitePopulation& pop) {
  std::map<PsuKey, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    auto& a = acc[{pop.stratum[i], pop.psu[i]}];
    a.first += pop.z[i];
    a.second += 1;
  }
  std::map<PsuKey, double> m;
  for (const auto& [key, a] : acc) m[key] = measure_of_size(a.first / static_cast<double>(a.second));
  return m;
}

TwoStageDesign survey_design_for(const FinitePopulation& pop, const SimConfig& cfg) {
  TwoStageDesign d;
  int h_max = 0;
  for (int s : pop.stratum) h_max = std::max(h_max, s);
  d.expected_psus.assign(static_cast<std::size_t>(h_max), cfg.psus_selected_per_stratum);
  d.psu_size = psu_measures(pop);
  d.stage2_fraction = cfg.second_stage_fraction;
  return d;
}

SurveySample apply_survey(const FinitePopulation& pop, const SimConfig& cfg, std::uint64_t seed) {
  return draw_sample(pop, survey_design_for(pop, cfg), seed);
}

Matrix GaussianLaw::sample(std::size_t n, Rng& rng) const {
  const std::size_t d = mean.size();
  const Matrix l = cholesky(covariance);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, d);
  std::vector<double> e(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : e) v = normal(rng);
    for (std::size_t a = 0; a < d; ++a) {
      double s = mean[a];
      for (std::size_t b = 0; b <= a; ++b) s += l(a, b) * e[b];
      out(i, a) = s;
    }
  }
  return out;
}

GaussianLaw true_conditional(std::span<const double> x, bool zero_signal) {
  if (x.size() < 2) throw Error(ErrorKind::DimensionMismatch, "benchmark covariates need x1 and x2");
  GaussianLaw law;
  law.covariance = Matrix(2, 2);
  law.covariance(0, 0) = law.covariance(1, 1) = 1.0;
  law.covariance(0, 1) = law.covariance(1, 0) = kRho;
  if (zero_signal) {
    law.mean = {0.0, 0.0};
    return law;
  }
  law.mean = {1.5 * x[1] + 2.0 * x[0], 1.5 * x[1]};
  const double b[2] = {50.0 * x[0], -(3.0 * x[1] + 1.0)};
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < 2; ++c) law.covariance(a, c) += b[a] * b[c];
  }
  return law;
}

double true_marginal_mean(double x1, bool zero_signal) { return zero_signal ? 0.0 : 2.0 * x1; }

ForestMean::ForestMean(const Forest& forest) : forest_(forest), dim_(forest.sample.y.cols()) {
  const Matrix& y = forest.sample.y;
  for (const Tree& tree : forest.trees) {
    std::vector<double> means(tree.leaf_units.size() * dim_, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t leaf = 0; leaf < tree.leaf_units.size(); ++leaf) {
      const double total = tree.leaf_total[leaf];
      if (!(total > 0.0)) continue;
      for (std::size_t c = 0; c < dim_; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < tree.leaf_units[leaf].size(); ++k) {
          s += tree.leaf_weights[leaf][k] / total * y(tree.leaf_units[leaf][k], c);
        }
        means[leaf * dim_ + c] = s;
      }
    }
    leaf_mean_.push_back(std::move(means));
  }
}

std::vector<double> ForestMean::mean(std::span<const double> x, std::size_t tree_limit) const {
  const std::size_t used = tree_limit == 0 ? forest_.trees.size() : std::min(tree_limit, forest_.trees.size());
  std::vector<double> sum(dim_, 0.0);
  int contributing = 0;
  for (std::size_t b = 0; b < used; ++b) {
    const auto leaf = static_cast<std::size_t>(forest_.trees[b].leaf_of(x));
    const double* m = leaf_mean_[b].data() + leaf * dim_;
    if (std::isnan(m[0])) continue;
    for (std::size_t c = 0; c < dim_; ++c) sum[c] += m[c];
    ++contributing;
  }
  if (contributing == 0) throw Error(ErrorKind::NoSupport, "no tree has est-side mass at query");
  for (double& v : sum) v /= static_cast<double>(contributing);
  return sum;
}

std::vector<double> ForestMean::prefix_means(std::span<const double> x, std::size_t component,
                                             std::span<const int> prefixes) const {
  const int max_b = prefixes.empty() ? 0 : *std::max_element(prefixes.begin(), prefixes.end());
  const int used = std::min<int>(max_b, static_cast<int>(forest_.trees.size()));
  std::vector<double> running_sum(static_cast<std::size_t>(used) + 1, 0.0);
  std::vector<int> running_count(static_cast<std::size_t>(used) + 1, 0);
  for (int b = 0; b < used; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    const auto leaf = static_cast<std::size_t>(forest_.trees[bi].leaf_of(x));
    const double m = leaf_mean_[bi][leaf * dim_ + component];
    running_sum[bi + 1] = running_sum[bi];
    running_count[bi + 1] = running_count[bi];
    if (!std::isnan(m)) {
      running_sum[bi + 1] += m;
      running_count[bi + 1] += 1;
    }
  }
  std::vector<double> out;
  for (int p : prefixes) {
    const auto k = static_cast<std::size_t>(std::min(p, used));
    if (running_count[k] == 0) throw Error(ErrorKind::NoSupport, "no tree has est-side mass at query");
    out.push_back(running_sum[k] / running_count[k]);
  }
  return out;
}

Matrix marginal_completions(std::size_t p, int normal_points) {
  if (p < 2) return Matrix(1, p);
  const boost::math::normal_distribution<double> std_normal;
  const int levels = p > 2 ? normal_points : 1;
  Matrix out;
  for (double x2 : {-1.0, 1.0}) {
    for (int k = 1; k <= levels; ++k) {
      std::vector<double> row(p, 0.0);
      row[1] = x2;
      const double q = boost::math::quantile(std_normal, (k - 0.5) / levels);
      for (std::size_t j = 2; j < p; ++j) row[j] = q;
      out.append_row(row);
    }
  }
  return out;
}

MetricsReport run_experiment(const SimConfig& cfg) {
  cfg.validate();
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  std::vector<SeedResult> results(seeds.size());

  const int workers = cfg.workers > 0 ? cfg.workers : 0;
  const auto count = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers > 0 ? workers : omp_get_max_threads())
  for (std::int64_t s = 0; s < count; ++s) {
    const auto k = static_cast<std::size_t>(s);
    try {
      results[k] = run_seed(cfg, seeds[k]);
    } catch (const std::exception& e) {
      results[k].ok = false;
      results[k].error = e.what();
    }
  }

  MetricsReport report;
  // (method, B index) -> per-seed metrics and curves
  std::map<std::pair<std::string, std::size_t>, std::vector<const MethodResult*>> groups;
  std::vector<std::string> method_order;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const SeedResult& r = results[k];
    if (!r.ok) {
      report.failures.push_back({seeds[k], r.error});
      continue;
    }
    for (const MethodResult& m : r.methods) {
      if (std::find(method_order.begin(), method_order.end(), m.method) == method_order.end()) {
        method_order.push_back(m.method);
      }
      for (std::size_t b = 0; b < cfg.trees.size(); ++b) {
        report.rows.push_back({seeds[k], m.method, cfg.N, cfg.trees[b], m.n_s, m.mmd100[b], m.rmse[b]});
        groups[{m.method, b}].push_back(&m);
      }
    }
  }

  const auto grid = static_cast<std::size_t>(cfg.rmse_grid);
  for (const std::string& method : method_order) {
    for (std::size_t b = 0; b < cfg.trees.size(); ++b) {
      const auto& members = groups[{method, b}];
      std::vector<double> mmd, rmse, ns;
      for (const MethodResult* m : members) {
        mmd.push_back(m->mmd100[b]);
        rmse.push_back(m->rmse[b]);
        ns.push_back(static_cast<double>(m->n_s));
      }
      report.aggregates.push_back({method, cfg.N, cfg.trees[b], members.size(), mean_of(ns), mean_of(mmd),
                                   sd_of(mmd), mean_of(rmse), sd_of(rmse)});
      for (std::size_t g = 0; g < grid; ++g) {
        const double x1 = grid == 1 ? 0.5 : static_cast<double>(g) / static_cast<double>(grid - 1);
        const double truth = true_marginal_mean(x1, cfg.zero_signal);
        std::vector<double> est;
        double se = 0.0;
        for (const MethodResult* m : members) {
          est.push_back(m->curve[b][g]);
          se += (m->curve[b][g] - truth) * (m->curve[b][g] - truth);
        }
        const double mse = members.empty() ? 0.0 : se / static_cast<double>(members.size());
        report.pointwise.push_back({method, cfg.N, cfg.trees[b], x1, mse, sd_of(est)});
      }
    }
  }
  return report;
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
  std::ostringstream out;
  out << "seed,method,N,B,n_s,mmd100,rmse\n";
  for (const MetricRow& r : report.rows) {
    out << r.seed << ',' << r.method << ',' << r.N << ',' << r.B << ',' << r.n_s << ','
        << io::format_double(r.mmd100) << ',' << io::format_double(r.rmse) << '\n';
  }
  io::atomic_write(path, out.str());
}

void write_pointwise_csv(const std::string& path, const MetricsReport& report) {
  std::ostringstream out;
  out << "method,N,B,x1,mse,sd\n";
  for (const PointwiseRow& r : report.pointwise) {
    out << r.method << ',' << r.N << ',' << r.B << ',' << io::format_double(r.x1) << ','
        << io::format_double(r.mse) << ',' << io::format_double(r.sd) << '\n';
  }
  io::atomic_write(path, out.str());
}

}  // namespace sdrf
