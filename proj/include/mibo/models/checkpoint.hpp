#pragma once

#include <filesystem>
#include <vector>

#include "mibo/models/task_network.hpp"

namespace mibo::models {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  NetworkSpec spec;
  std::vector<double> theta;
  std::vector<double> selection;
};

// manifest.json + params.bin + selection.bin, each written atomically.
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint read_checkpoint(const std::filesystem::path& dir);

}  // namespace mibo::models
