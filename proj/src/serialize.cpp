#include "sdrf/serialize.hpp"

#include <set>

#include "sdrf/io.hpp"

namespace sdrf {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::ConfigError, "unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void read_into(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::ConfigError, std::string("bad value for \"") + key + "\"");
  }
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from(const Json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto& data = j.at("data");
  if (data.size() != m.rows()) throw Error(ErrorKind::SchemaError, "matrix row count mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = data[r].get<std::vector<double>>();
    if (row.size() != m.cols()) throw Error(ErrorKind::SchemaError, "matrix column count mismatch");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

Json psus_json(const std::vector<PsuKey>& psus) {
  Json a = Json::array();
  for (const auto& [h, j] : psus) a.push_back({h, j});
  return a;
}

std::vector<PsuKey> psus_from(const Json& j) {
  std::vector<PsuKey> out;
  for (const auto& e : j) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return out;
}

// Tree structure as nested split objects.
Json node_json(const Tree& tree, int k) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(k)];
  if (n.is_leaf()) return Json{{"leaf", n.leaf_id}};
  return Json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", node_json(tree, n.left)},
              {"right", node_json(tree, n.right)}};
}

int node_from(const Json& j, Tree& tree, int depth) {
  const int k = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes.back().depth = depth;
  if (j.contains("leaf")) return k;
  const int feature = j.at("feature").get<int>();
  const double threshold = j.at("threshold").get<double>();
  const int left = node_from(j.at("left"), tree, depth + 1);
  const int right = node_from(j.at("right"), tree, depth + 1);
  TreeNode& n = tree.nodes[static_cast<std::size_t>(k)];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return k;
}

// Thread count is a property of the run, not of the model.
ForestConfig portable_config(ForestConfig c) {
  c.workers = 0;
  return c;
}

}  // namespace

ForestConfig forest_config_from_json(const Json& j, const ForestConfig& base) {
  reject_unknown(j,
                 {"num_trees", "honesty_fraction", "max_depth", "min_node_size", "max_weight_ratio",
                  "weight_guard", "mtry", "bandwidth", "rff_dim", "threshold_grid", "min_gain", "resample",
                  "bootstrap", "master_seed", "workers"},
                 "forest config");
  ForestConfig c = base;
  read_into(j, "num_trees", c.num_trees);
  read_into(j, "honesty_fraction", c.honesty_fraction);
  read_into(j, "max_depth", c.max_depth);
  read_into(j, "min_node_size", c.min_node_size);
  read_into(j, "max_weight_ratio", c.max_weight_ratio);
  if (j.contains("weight_guard")) c.weight_guard = weight_guard_from_string(j.at("weight_guard").get<std::string>());
  read_into(j, "mtry", c.mtry);
  read_into(j, "bandwidth", c.bandwidth);
  read_into(j, "rff_dim", c.rff_dim);
  read_into(j, "threshold_grid", c.threshold_grid);
  read_into(j, "min_gain", c.min_gain);
  if (j.contains("resample")) c.resample = resample_scheme_from_string(j.at("resample").get<std::string>());
  if (j.contains("bootstrap")) {
    const Json& b = j.at("bootstrap");
    reject_unknown(b, {"scheme", "skip_second_stage", "average_M"}, "bootstrap config");
    if (b.contains("scheme")) c.bootstrap.scheme = pseudo_scheme_from_string(b.at("scheme").get<std::string>());
    read_into(b, "skip_second_stage", c.bootstrap.skip_second_stage);
    read_into(b, "average_M", c.bootstrap.average_M);
  }
  read_into(j, "master_seed", c.master_seed);
  read_into(j, "workers", c.workers);
  if (c.num_trees < 1) throw Error(ErrorKind::ConfigError, "num_trees must be positive");
  if (!(c.honesty_fraction > 0.0 && c.honesty_fraction < 1.0)) {
    throw Error(ErrorKind::ConfigError, "honesty_fraction must lie in (0, 1)");
  }
  if (c.bootstrap.average_M < 1) throw Error(ErrorKind::ConfigError, "average_M must be positive");
  if (c.rff_dim < 0 || c.rff_dim % 2 != 0) throw Error(ErrorKind::ConfigError, "rff_dim must be even");
  return c;
}

Json to_json(const ForestConfig& c) {
  return {{"num_trees", c.num_trees},
          {"honesty_fraction", c.honesty_fraction},
          {"max_depth", c.max_depth},
          {"min_node_size", c.min_node_size},
          {"max_weight_ratio", c.max_weight_ratio},
          {"weight_guard", to_string(c.weight_guard)},
          {"mtry", c.mtry},
          {"bandwidth", c.bandwidth},
          {"rff_dim", c.rff_dim},
          {"threshold_grid", c.threshold_grid},
          {"min_gain", c.min_gain},
          {"resample", to_string(c.resample)},
          {"bootstrap",
           {{"scheme", to_string(c.bootstrap.scheme)},
            {"skip_second_stage", c.bootstrap.skip_second_stage},
            {"average_M", c.bootstrap.average_M}}},
          {"master_seed", c.master_seed},
          {"workers", c.workers}};
}

SimConfig sim_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"N", "p", "H", "psus_per_stratum", "psus_selected_per_stratum", "second_stage_fraction",
                  "zero_signal", "trees", "seeds", "forest", "mmd_points", "truth_draws", "rmse_grid",
                  "include_naive", "workers"},
                 "experiment config");
  SimConfig c = j.contains("N") ? sim_preset(j.at("N").get<std::size_t>()) : SimConfig{};
  read_into(j, "p", c.p);
  read_into(j, "H", c.H);
  read_into(j, "psus_per_stratum", c.psus_per_stratum);
  read_into(j, "psus_selected_per_stratum", c.psus_selected_per_stratum);
  read_into(j, "second_stage_fraction", c.second_stage_fraction);
  read_into(j, "zero_signal", c.zero_signal);
  read_into(j, "trees", c.trees);
  read_into(j, "seeds", c.seeds);
  if (j.contains("forest")) c.forest = forest_config_from_json(j.at("forest"), c.forest);
  read_into(j, "mmd_points", c.mmd_points);
  read_into(j, "truth_draws", c.truth_draws);
  read_into(j, "rmse_grid", c.rmse_grid);
  read_into(j, "include_naive", c.include_naive);
  read_into(j, "workers", c.workers);
  c.validate();
  return c;
}

Json to_json(const SimConfig& c) {
  return {{"N", c.N},
          {"p", c.p},
          {"H", c.H},
          {"psus_per_stratum", c.psus_per_stratum},
          {"psus_selected_per_stratum", c.psus_selected_per_stratum},
          {"second_stage_fraction", c.second_stage_fraction},
          {"zero_signal", c.zero_signal},
          {"trees", c.trees},
          {"seeds", c.seeds},
          {"forest", to_json(c.forest)},
          {"mmd_points", c.mmd_points},
          {"truth_draws", c.truth_draws},
          {"rmse_grid", c.rmse_grid},
          {"include_naive", c.include_naive},
          {"workers", c.workers}};
}

Json to_json(const SurveySample& s) {
  return {{"ids", s.ids},
          {"pi", s.pi},
          {"stratum", s.stratum},
          {"psu", s.psu},
          {"stage1_pi", s.stage1_pi},
          {"stage2_pi", s.stage2_pi},
          {"x", matrix_json(s.x)},
          {"y", matrix_json(s.y)},
          {"population_size", s.population_size},
          {"design", to_string(s.design)},
          {"stage2_known", s.stage2_known}};
}

SurveySample sample_from_json(const Json& j) {
  SurveySample s;
  s.ids = j.at("ids").get<std::vector<std::size_t>>();
  s.pi = j.at("pi").get<std::vector<double>>();
  s.stratum = j.at("stratum").get<std::vector<int>>();
  s.psu = j.at("psu").get<std::vector<int>>();
  s.stage1_pi = j.at("stage1_pi").get<std::vector<double>>();
  s.stage2_pi = j.at("stage2_pi").get<std::vector<double>>();
  s.x = matrix_from(j.at("x"));
  s.y = matrix_from(j.at("y"));
  s.population_size = j.at("population_size").get<std::size_t>();
  s.design = design_kind_from_string(j.at("design").get<std::string>());
  s.stage2_known = j.at("stage2_known").get<bool>();
  s.validate();
  return s;
}

Json to_json(const Forest& forest) {
  Json trees = Json::array();
  for (const Tree& t : forest.trees) {
    trees.push_back({{"root", node_json(t, 0)},
                     {"split_psus", psus_json(t.partition.split_psus)},
                     {"est_psus", psus_json(t.partition.est_psus)},
                     {"resample_scheme", to_string(t.resample.scheme)},
                     {"resample_seed", t.resample.seed},
                     {"multipliers", t.resample.multipliers}});
  }
  return {{"format", "sdrf-forest"},
          {"version", kForestFormatVersion},
          {"config", to_json(portable_config(forest.config))},
          {"kernel",
           {{"bandwidth", forest.kernel.bandwidth()},
            {"outcome_dim", forest.kernel.outcome_dim()},
            {"rff_dim", forest.kernel.rff_dim()},
            {"rff_seed", forest.kernel.rff_seed()}}},
          {"sample", to_json(forest.sample)},
          {"trees", trees}};
}

Forest forest_from_json(const Json& j) {
  try {
    if (j.value("format", "") != "sdrf-forest") throw Error(ErrorKind::SchemaError, "not a forest file");
    const int version = j.at("version").get<int>();
    if (version != kForestFormatVersion) {
      throw Error(ErrorKind::SchemaError, "unsupported forest format version " + std::to_string(version));
    }
    Forest f;
    f.config = forest_config_from_json(j.at("config"));
    const Json& k = j.at("kernel");
    f.kernel = KernelSpec(k.at("bandwidth").get<double>(), k.at("outcome_dim").get<std::size_t>(),
                          k.at("rff_dim").get<std::size_t>(), k.at("rff_seed").get<std::uint64_t>());
    f.sample = sample_from_json(j.at("sample"));
    for (const Json& tj : j.at("trees")) {
      Tree t;
      node_from(tj.at("root"), t, 0);
      t.partition.split_psus = psus_from(tj.at("split_psus"));
      t.partition.est_psus = psus_from(tj.at("est_psus"));
      t.resample.scheme = resample_scheme_from_string(tj.at("resample_scheme").get<std::string>());
      t.resample.seed = tj.at("resample_seed").get<std::uint64_t>();
      t.resample.multipliers = tj.at("multipliers").get<std::vector<double>>();
      if (t.resample.multipliers.size() != f.sample.size()) {
        throw Error(ErrorKind::SchemaError, "multiplier count does not match the sample");
      }
      populate_leaves(t, f.sample, f.config.honesty_fraction);
      f.trees.push_back(std::move(t));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("malformed forest file: ") + e.what());
  }
}

void save_forest(const std::string& path, const Forest& forest) { io::atomic_write(path, to_json(forest).dump()); }

Forest load_forest(const std::string& path) { return forest_from_json(read_json_file(path)); }

Json to_json(const DesignDiagnostics& d) {
  return {{"lln_gap", d.lln_gap},
          {"n_eff", d.n_eff},
          {"pi_min", d.pi_min},
          {"pi_max", d.pi_max},
          {"sampling_fraction", d.sampling_fraction}};
}

Json aggregate_json(const MetricsReport& report) {
  Json rows = Json::array();
  for (const AggregateRow& a : report.aggregates) {
    rows.push_back({{"method", a.method},
                    {"N", a.N},
                    {"B", a.B},
                    {"seeds", a.seeds},
                    {"n_s_mean", a.n_s_mean},
                    {"mmd_mean", a.mmd_mean},
                    {"mmd_sd", a.mmd_sd},
                    {"rmse_mean", a.rmse_mean},
                    {"rmse_sd", a.rmse_sd}});
  }
  Json failures = Json::array();
  for (const SeedFailure& f : report.failures) failures.push_back({{"seed", f.seed}, {"message", f.message}});
  return {{"aggregates", rows}, {"failures", failures}};
}

Json read_json_file(const std::string& path) {
  const std::string text = io::read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
}

}  // namespace sdrf
