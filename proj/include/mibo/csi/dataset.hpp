#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mibo/csi/channel.hpp"
#include "mibo/csi/scenario.hpp"

namespace mibo::csi {

// How a complex CSI matrix becomes a model input row.
//   stacked:   [re(h_0), im(h_0), re(h_1), im(h_1), ...]  (2 features per subcarrier)
//   magnitude: [|h_0|, |h_1|, ...]                         (1 feature per subcarrier)
enum class FeatureMode { stacked, magnitude };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);
inline std::size_t features_per_subcarrier(FeatureMode mode) noexcept {
  return mode == FeatureMode::stacked ? 2 : 1;
}

struct CsiSample {
  CsiMatrix h;
  std::size_t state = 0;  // sensing label
  Point2 position;        // meters
  std::size_t slot = 0;
};

struct Dataset {
  SimScenario scenario;
  std::uint64_t seed = 0;
  FeatureMode mode = FeatureMode::stacked;
  std::vector<CsiSample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t total_subcarriers() const noexcept { return scenario.total_subcarriers(); }
  std::size_t state_count() const noexcept { return scenario.states.size(); }
};

// One sample per (grid point, state), grid-major. Pure function of its arguments.
Dataset generate_dataset(const SimScenario& scenario, std::uint64_t seed,
                         FeatureMode mode = FeatureMode::stacked);

inline constexpr int kDatasetFormatVersion = 1;

// Directory layout: manifest.json, h.bin, m.bin, p.bin (little-endian f64).
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace mibo::csi
