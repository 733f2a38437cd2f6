#include "mibo/csi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mibo::csi {

double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

bool SimScenario::contains(Point2 p) const noexcept {
  return p.x >= 0.0 && p.x <= room_width && p.y >= 0.0 && p.y <= room_height;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("scenario: " + what);
}

bool gain_in_db_range(double g) {
  if (!(g > 0.0)) return false;
  const double db = 20.0 * std::log10(g);
  return db >= -30.0 - 1e-9 && db <= 1e-9;
}

}  // namespace

void SimScenario::validate() const {
  require(room_width > 0.0 && room_height > 0.0, "room dimensions must be positive");
  require(!tx.empty(), "at least one transmitter is required");
  require(!rx.empty(), "at least one receiver is required");
  for (const auto& p : tx) require(contains(p), "transmitter outside the room");
  for (const auto& p : rx) require(contains(p), "receiver outside the room");
  require(subcarriers >= 32 && subcarriers <= 512, "subcarriers per link must be in [32, 512]");
  require(carrier_hz > 0.0 && spacing_hz > 0.0, "carrier and spacing must be positive");
  require(gain_in_db_range(static_gain_ref), "static reference gain must lie in [-30, 0] dB");
  require(gain_in_db_range(dynamic_gain_ref), "dynamic reference gain must lie in [-30, 0] dB");
  require(noise_variance >= 0.0, "noise variance must be non-negative");
  require(static_paths <= 5, "at most 5 static paths (direct + 4 walls)");
  require(dynamic_paths <= 5, "at most 5 dynamic paths (direct + 4 walls)");
  require(grid_spacing > 0.0, "grid spacing must be positive");
  require(!states.empty(), "at least one sensing state is required");
  for (const auto& s : states) require(s.gamma >= 0.0, "state gamma must be non-negative");
}

std::vector<Point2> grid_points(const SimScenario& scenario) {
  const auto nx = static_cast<std::size_t>(std::floor(scenario.room_width / scenario.grid_spacing + 1e-9)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor(scenario.room_height / scenario.grid_spacing + 1e-9)) + 1;
  std::vector<Point2> pts;
  pts.reserve(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      pts.push_back({std::min(static_cast<double>(ix) * scenario.grid_spacing, scenario.room_width),
                     std::min(static_cast<double>(iy) * scenario.grid_spacing, scenario.room_height)});
    }
  }
  return pts;
}

}  // namespace mibo::csi
