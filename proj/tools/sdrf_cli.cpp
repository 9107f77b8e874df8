#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <omp.h>
#include <sstream>

#include "sdrf/forest.hpp"
#include "sdrf/functionals.hpp"
#include "sdrf/io.hpp"
#include "sdrf/serialize.hpp"
#include "sdrf/sim.hpp"
#include "sdrf/survey.hpp"

namespace fs = std::filesystem;
using namespace sdrf;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out = ".";
};

std::string out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

Json load_config(const Common& c) { return c.config.empty() ? Json::object() : read_json_file(c.config); }

int cmd_simulate(const Common& c) {
  Json j = load_config(c);
  if (!j.contains("N")) j["N"] = 4000;
  SimConfig cfg = sim_config_from_json(j);
  const FinitePopulation pop = generate_population(cfg, derive_seed(c.seed, 1));
  const SurveySample sample = apply_survey(pop, cfg, derive_seed(c.seed, 2));
  write_population_csv(out_path(c, "population.csv"), pop);
  write_sample_csv(out_path(c, "sample.csv"), sample);
  Json diag = to_json(design_diagnostics(sample, pop.size()));
  diag["N"] = pop.size();
  diag["n_s"] = sample.size();
  diag["H"] = cfg.H;
  diag["psus_per_stratum"] = cfg.psus_per_stratum;
  diag["psus_selected_per_stratum"] = cfg.psus_selected_per_stratum;
  diag["seed"] = c.seed;
  io::atomic_write(out_path(c, "diagnostics.json"), diag.dump(2) + "\n");
  return 0;
}

int cmd_fit(const Common& c, const std::string& input) {
  ForestConfig cfg = forest_config_from_json(load_config(c));
  cfg.master_seed = c.seed;
  cfg.workers = c.workers;
  const SurveySample sample = read_sample_csv(input);
  const Forest forest = fit_forest(sample, cfg);
  save_forest(out_path(c, "model.json"), forest);

  std::ostringstream log;
  log << "n_s " << sample.size() << " trees " << forest.trees.size() << " bandwidth "
      << io::format_double(forest.kernel.bandwidth()) << " min_node_size " << forest.config.min_node_size
      << " max_weight_ratio " << io::format_double(forest.config.max_weight_ratio) << '\n';
  log << "tree,depth,leaves,split_psus,est_psus\n";
  for (std::size_t b = 0; b < forest.trees.size(); ++b) {
    const Tree& t = forest.trees[b];
    log << b << ',' << t.depth() << ',' << t.num_leaves() << ',' << t.partition.split_psus.size() << ','
        << t.partition.est_psus.size() << '\n';
  }
  io::atomic_write(out_path(c, "fit_log.txt"), log.str());
  return 0;
}

struct PredictRequest {
  bool mean = true;
  bool covariance = false;
  std::vector<double> quantiles;
  std::vector<std::vector<double>> cdf;
  std::vector<double> tolerance;
  double ridge_factor = 1e-8;
};

PredictRequest parse_request(const Json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key != "mean" && key != "covariance" && key != "quantiles" && key != "cdf" && key != "tolerance" &&
        key != "ridge_factor") {
      throw Error(ErrorKind::ConfigError, "unknown key \"" + key + "\" in predict config");
    }
  }
  PredictRequest r;
  try {
    r.mean = j.value("mean", true);
    r.covariance = j.value("covariance", false);
    r.quantiles = j.value("quantiles", std::vector<double>{});
    r.cdf = j.value("cdf", std::vector<std::vector<double>>{});
    r.tolerance = j.value("tolerance", std::vector<double>{});
    r.ridge_factor = j.value("ridge_factor", 1e-8);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("predict config: ") + e.what());
  }
  for (double t : r.quantiles) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::ConfigError, "quantile levels must lie in (0, 1]");
  }
  return r;
}

int cmd_predict(const Common& c, const std::string& model_path, const std::string& input) {
  const PredictRequest req = parse_request(load_config(c));
  const Forest forest = load_forest(model_path);
  const std::size_t p = forest.sample.x.cols();
  const std::size_t d = forest.sample.y.cols();
  const io::CsvTable table = io::read_csv(input);

  std::vector<int> xcol(p), ycol(d, -1);
  for (std::size_t k = 0; k < p; ++k) {
    const std::string name = "x" + std::to_string(k + 1);
    xcol[k] = table.column(name);
    if (xcol[k] < 0) throw Error(ErrorKind::SchemaError, "missing column \"" + name + "\"");
  }
  for (std::size_t k = 0; k < d; ++k) ycol[k] = table.column("y" + std::to_string(k + 1));
  const bool has_y = std::all_of(ycol.begin(), ycol.end(), [](int v) { return v >= 0; });
  if (!req.tolerance.empty() && !has_y) {
    throw Error(ErrorKind::SchemaError, "tolerance membership needs outcome columns y1..y" + std::to_string(d));
  }

  std::vector<ToleranceRegion> regions;
  for (double a : req.tolerance) regions.push_back(tolerance_threshold(forest, a, req.ridge_factor));

  std::ostringstream out;
  out << "row,status";
  if (req.mean) {
    for (std::size_t k = 0; k < d; ++k) out << ",mean_y" << k + 1;
  }
  for (double t : req.quantiles) {
    for (std::size_t k = 0; k < d; ++k) out << ",q" << io::format_double(t) << "_y" << k + 1;
  }
  for (std::size_t g = 0; g < req.cdf.size(); ++g) out << ",cdf" << g + 1;
  if (req.covariance) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) out << ",cov_" << a + 1 << b + 1;
    }
  }
  if (!req.tolerance.empty()) out << ",score";
  for (double a : req.tolerance) out << ",in_region_" << io::format_double(a);
  out << '\n';

  Json grid = Json::array();
  std::vector<double> x(p), y(d);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t k = 0; k < p; ++k) {
      x[k] = io::parse_double(table.rows[r][static_cast<std::size_t>(xcol[k])], "x" + std::to_string(k + 1), r + 1);
    }
    if (has_y) {
      for (std::size_t k = 0; k < d; ++k) {
        y[k] = io::parse_double(table.rows[r][static_cast<std::size_t>(ycol[k])], "y" + std::to_string(k + 1), r + 1);
      }
    }
    std::ostringstream line;
    try {
      const WeightedDistribution dist = predict_distribution(forest, x);
      const ConditionalSummary s = summarize(dist);
      line << r + 1 << ",ok";
      if (req.mean) {
        for (double v : s.mean) line << ',' << io::format_double(v);
      }
      for (double t : req.quantiles) {
        for (std::size_t k = 0; k < d; ++k) line << ',' << io::format_double(cond_quantile(dist, k, t));
      }
      for (const auto& point : req.cdf) line << ',' << io::format_double(cond_cdf(dist, point));
      if (req.covariance) {
        for (std::size_t a = 0; a < d; ++a) {
          for (std::size_t b = a; b < d; ++b) line << ',' << io::format_double(s.covariance(a, b));
        }
      }
      if (!req.tolerance.empty()) {
        const RegionQuery q = region_query(forest, x, req.ridge_factor);
        const double score = mahalanobis_score(q.summary, y, q.ridge);
        line << ',' << io::format_double(score);
        Json flags = Json::array();
        for (const auto& region : regions) {
          line << ',' << (score <= region.threshold ? 1 : 0);
          flags.push_back(score <= region.threshold);
        }
        Json cov = Json::array();
        for (std::size_t a = 0; a < d; ++a) {
          Json rowv = Json::array();
          for (std::size_t b = 0; b < d; ++b) rowv.push_back(q.summary.covariance(a, b));
          cov.push_back(rowv);
        }
        grid.push_back({{"row", r + 1}, {"x", x}, {"mean", q.summary.mean}, {"covariance", cov}, {"score", score},
                        {"in_region", flags}});
      }
      out << line.str() << '\n';
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoSupport && e.kind() != ErrorKind::SingularCovariance) throw;
      out << r + 1 << ',' << to_string(e.kind()) << '\n';
    }
  }
  io::atomic_write(out_path(c, "predictions.csv"), out.str());
  if (!regions.empty()) {
    Json th = Json::array();
    for (const auto& region : regions) {
      th.push_back({{"alpha", region.alpha}, {"threshold", region.threshold}, {"ridge_factor", region.ridge_factor}});
    }
    io::atomic_write(out_path(c, "tolerance.json"), Json{{"regions", th}, {"queries", grid}}.dump(2) + "\n");
  }
  return 0;
}

int cmd_bench(const Common& c) {
  SimConfig cfg = sim_config_from_json(load_config(c));
  cfg.forest.master_seed = c.seed;
  cfg.workers = c.workers;
  const MetricsReport report = run_experiment(cfg);
  write_metrics_csv(out_path(c, "metrics.csv"), report);
  write_pointwise_csv(out_path(c, "pointwise.csv"), report);
  io::atomic_write(out_path(c, "aggregate.json"), aggregate_json(report).dump(2) + "\n");
  for (const auto& f : report.failures) std::cerr << "seed " << f.seed << " failed: " << f.message << '\n';
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool needs_config) {
  auto* opt = sub->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  if (needs_config) opt->required();
  sub->add_option("--seed", c.seed, "Master seed")->required();
  sub->add_option("--workers", c.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survey-calibrated distributional random forests"};
  app.require_subcommand(1);
  Common common;
  std::string input, model;

  auto* simulate = app.add_subcommand("simulate", "Draw a benchmark population and survey sample");
  add_common(simulate, common, false);

  auto* fit = app.add_subcommand("fit", "Fit a forest to a survey sample CSV");
  add_common(fit, common, false);
  fit->add_option("--input", input, "Sample CSV")->required()->check(CLI::ExistingFile);

  auto* predict = app.add_subcommand("predict", "Evaluate conditional functionals at query rows");
  add_common(predict, common, false);
  predict->add_option("--model", model, "Model JSON written by fit")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", input, "Query CSV with columns x1..xp (and y1..yd for tolerance)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Run the simulation benchmark");
  add_common(bench, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (common.workers > 0) omp_set_num_threads(common.workers);
    if (*simulate) return cmd_simulate(common);
    if (*fit) return cmd_fit(common, input);
    if (*predict) return cmd_predict(common, model, input);
    if (*bench) return cmd_bench(common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::SchemaError || e.kind() == ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
