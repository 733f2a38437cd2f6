#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mibo/cli/config.hpp"
#include "mibo/metrics/kfold.hpp"

namespace mibo::cli {

enum class Method { spg_mibo, penalty, single_task };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Runtime failures that are not solver aborts: missing inputs, unwritable
// outputs, incompatible run directories.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainRequest {
  Method method = Method::spg_mibo;
  std::optional<solver::Task> task;  // required for single_task
  std::filesystem::path data;
  std::filesystem::path out;
  std::size_t jobs = 1;
  bool force = false;
};

void cmd_simulate(const RunConfig& config, const std::filesystem::path& out, bool force, std::ostream& log);

// Trains every configured seed under K-fold evaluation and returns the merged report.
metrics::EvalReport cmd_train(const RunConfig& config, const TrainRequest& request, std::ostream& log);

// Writes compare.json under `out` when it is non-empty.
void cmd_compare(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out,
                 std::ostream& log);

void cmd_report(const std::filesystem::path& run, std::ostream& log);

// 64-bit FNV-1a over the dataset manifest and binaries.
std::uint64_t dataset_fingerprint(const std::filesystem::path& dir);

// Ten equal-width bins over [0,1]; 1.0 falls in the last bin.
std::vector<std::size_t> histogram10(const std::vector<double>& values);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mibo::cli
