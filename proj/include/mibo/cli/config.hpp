#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mibo/csi/dataset.hpp"
#include "mibo/csi/scenario.hpp"
#include "mibo/solver/spg_mibo.hpp"

namespace mibo::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConfigError = 3,
  kSolverAbort = 4,
  kIoError = 5,
};

enum class ConfigErrorKind { missing_file, malformed, unknown_key, invalid_value, constraint };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ConfigErrorKind kind() const noexcept { return kind_; }

 private:
  ConfigErrorKind kind_;
};

std::string to_string(ConfigErrorKind kind);

enum class GapSnapshot { final_iterate, best_validation };

struct RunConfig {
  csi::SimScenario scenario;
  std::uint64_t dataset_seed = 1;
  csi::FeatureMode featurization = csi::FeatureMode::stacked;
  solver::SolverConfig solver;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t folds = 5;
  GapSnapshot gap_snapshot = GapSnapshot::final_iterate;
  std::size_t validate_every = 50;  // only used for best-validation snapshots
};

// Sections: scenario, dataset, solver, run. An empty document yields the
// defaults; every key is checked and unknown ones are rejected by name.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

nlohmann::ordered_json config_to_json(const RunConfig& config);

// Checks cross-field constraints (N_min <= N_max, distinct seeds, ...).
void validate(const RunConfig& config);

}  // namespace mibo::cli
