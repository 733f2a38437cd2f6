#include "mibo/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "mibo/csi/scenario_json.hpp"
#include "mibo/models/features.hpp"

namespace mibo::cli {

using nlohmann::json;

std::string to_string(ConfigErrorKind kind) {
  switch (kind) {
    case ConfigErrorKind::missing_file: return "missing config file";
    case ConfigErrorKind::malformed: return "malformed config";
    case ConfigErrorKind::unknown_key: return "unknown config key";
    case ConfigErrorKind::invalid_value: return "invalid config value";
    case ConfigErrorKind::constraint: return "config constraint violated";
  }
  return "config error";
}

namespace {

[[noreturn]] void unknown(const std::string& section, const std::string& key) {
  throw ConfigError(ConfigErrorKind::unknown_key, "unknown key '" + section + "." + key + "'");
}

template <typename T>
T get(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ConfigErrorKind::invalid_value, "bad value for '" + path + "': " + v.dump());
  }
}

std::size_t get_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(ConfigErrorKind::invalid_value, "'" + path + "' must be a non-negative integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

void require_object(const json& j, const std::string& name) {
  if (!j.is_object()) throw ConfigError(ConfigErrorKind::invalid_value, "section '" + name + "' must be an object");
}

void read_solver(const json& j, solver::SolverConfig& s) {
  require_object(j, "solver");
  for (const auto& [key, v] : j.items()) {
    const std::string path = "solver." + key;
    if (key == "eta") s.eta = get<double>(v, path);
    else if (key == "K") s.K = get_count(v, path);
    else if (key == "eps") s.eps = v.is_null() ? std::nullopt : std::optional<double>(get<double>(v, path));
    else if (key == "eps_scale") s.eps_scale = get<double>(v, path);
    else if (key == "n_min") s.n_min = v.is_null() ? std::nullopt : std::optional<std::size_t>(get_count(v, path));
    else if (key == "n_max") s.n_max = v.is_null() ? std::nullopt : std::optional<std::size_t>(get_count(v, path));
    else if (key == "T") s.T = get_count(v, path);
    else if (key == "batch_size") s.batch_size = get_count(v, path);
    else if (key == "multiplier_tolerance") s.multiplier_tolerance = get<double>(v, path);
    else if (key == "drop_after") s.drop_after = get_count(v, path);
    else if (key == "lower_eta") s.lower_eta = v.is_null() ? std::nullopt : std::optional<double>(get<double>(v, path));
    else if (key == "cold_start") s.cold_start = get<bool>(v, path);
    else if (key == "lower_commit") s.lower_commit = get<bool>(v, path);
    else if (key == "lambda_p") s.lambda_p = get<double>(v, path);
    else if (key == "raw_init_range") s.raw_init_range = get<double>(v, path);
    else if (key == "hidden") s.hidden = get<std::vector<std::size_t>>(v, path);
    else if (key == "sensing_head") {
      try {
        s.sensing_head = models::head_from_string(get<std::string>(v, path));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(ConfigErrorKind::invalid_value, "bad value for '" + path + "': " + e.what());
      }
      if (s.sensing_head == models::HeadKind::position) {
        throw ConfigError(ConfigErrorKind::invalid_value, "'solver.sensing_head' cannot be 'position'");
      }
    } else if (key == "flush_every") s.flush_every = get_count(v, path);
    else unknown("solver", key);
  }
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ConfigError(ConfigErrorKind::malformed, "config root must be an object");
  for (const auto& [section, body] : j.items()) {
    if (section == "scenario") {
      try {
        c.scenario = csi::scenario_from_json(body, c.scenario);
      } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.rfind("unknown key", 0) == 0 ? ConfigErrorKind::unknown_key : ConfigErrorKind::invalid_value,
                          msg);
      }
    } else if (section == "dataset") {
      require_object(body, "dataset");
      for (const auto& [key, v] : body.items()) {
        if (key == "seed") c.dataset_seed = get<std::uint64_t>(v, "dataset.seed");
        else if (key == "featurization") {
          try {
            c.featurization = csi::feature_mode_from_string(get<std::string>(v, "dataset.featurization"));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(ConfigErrorKind::invalid_value, std::string("bad value for 'dataset.featurization': ") + e.what());
          }
        } else unknown("dataset", key);
      }
    } else if (section == "solver") {
      read_solver(body, c.solver);
    } else if (section == "run") {
      require_object(body, "run");
      for (const auto& [key, v] : body.items()) {
        if (key == "seeds") c.seeds = get<std::vector<std::uint64_t>>(v, "run.seeds");
        else if (key == "folds") c.folds = get_count(v, "run.folds");
        else if (key == "gap_snapshot") {
          const auto s = get<std::string>(v, "run.gap_snapshot");
          if (s == "final") c.gap_snapshot = GapSnapshot::final_iterate;
          else if (s == "best-validation") c.gap_snapshot = GapSnapshot::best_validation;
          else throw ConfigError(ConfigErrorKind::invalid_value, "bad value for 'run.gap_snapshot': " + v.dump());
        } else if (key == "validate_every") c.validate_every = get_count(v, "run.validate_every");
        else unknown("run", key);
      }
    } else {
      throw ConfigError(ConfigErrorKind::unknown_key, "unknown key '" + section + "'");
    }
  }
  validate(c);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); });
  if (blank) {
    RunConfig c;
    validate(c);
    return c;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigErrorKind::malformed, std::string("cannot parse config: ") + e.what());
  }
  return config_from_json(j);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(ConfigErrorKind::missing_file, "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const RunConfig& c) {
  try {
    c.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ConfigErrorKind::constraint, e.what());
  }
  try {
    c.solver.validate(c.scenario.total_subcarriers());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ConfigErrorKind::constraint, e.what());
  }
  if (c.seeds.empty()) throw ConfigError(ConfigErrorKind::constraint, "run.seeds must not be empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError(ConfigErrorKind::constraint, "run.seeds must be distinct");
  }
  if (c.folds < 2) throw ConfigError(ConfigErrorKind::constraint, "run.folds must be at least 2");
  if (c.validate_every < 1) throw ConfigError(ConfigErrorKind::constraint, "run.validate_every must be at least 1");
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  using oj = nlohmann::ordered_json;
  const auto& s = c.solver;
  const std::size_t n = c.scenario.total_subcarriers();
  oj out;
  out["scenario"] = oj::parse(csi::scenario_to_json(c.scenario).dump());
  out["dataset"] = {{"seed", c.dataset_seed}, {"featurization", csi::to_string(c.featurization)}};
  oj sol;
  sol["eta"] = s.eta;
  sol["K"] = s.K;
  sol["eps"] = s.eps ? oj(*s.eps) : oj(nullptr);
  sol["eps_scale"] = s.eps_scale;
  sol["n_min"] = s.resolved_n_min(n);
  sol["n_max"] = s.resolved_n_max(n);
  sol["T"] = s.T;
  sol["batch_size"] = s.batch_size;
  sol["multiplier_tolerance"] = s.multiplier_tolerance;
  sol["drop_after"] = s.drop_after;
  sol["lower_eta"] = s.lower_eta ? oj(*s.lower_eta) : oj(nullptr);
  sol["cold_start"] = s.cold_start;
  sol["lower_commit"] = s.lower_commit;
  sol["lambda_p"] = s.lambda_p;
  sol["raw_init_range"] = s.raw_init_range;
  sol["hidden"] = s.hidden;
  sol["sensing_head"] = models::to_string(s.sensing_head);
  sol["flush_every"] = s.flush_every;
  out["solver"] = sol;
  out["run"] = {{"seeds", c.seeds},
                {"folds", c.folds},
                {"gap_snapshot", c.gap_snapshot == GapSnapshot::final_iterate ? "final" : "best-validation"},
                {"validate_every", c.validate_every}};
  return out;
}

}  // namespace mibo::cli
