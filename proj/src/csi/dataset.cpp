#include "mibo/csi/dataset.hpp"

#include <stdexcept>

namespace mibo::csi {

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::stacked ? "stacked" : "magnitude";
}

FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "stacked") return FeatureMode::stacked;
  if (s == "magnitude") return FeatureMode::magnitude;
  throw std::invalid_argument("unknown featurization mode '" + s + "'");
}

Dataset generate_dataset(const SimScenario& scenario, std::uint64_t seed, FeatureMode mode) {
  scenario.validate();
  Dataset ds{scenario, seed, mode, {}};
  const auto grid = grid_points(scenario);
  ds.samples.reserve(grid.size() * scenario.states.size());
  for (const auto& p : grid) {
    for (std::size_t s = 0; s < scenario.states.size(); ++s) {
      const std::size_t slot = ds.samples.size();
      ds.samples.push_back({synthesize_csi(scenario, p, s, seed, slot), s, p, slot});
    }
  }
  return ds;
}

}  // namespace mibo::csi
