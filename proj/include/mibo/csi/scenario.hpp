#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mibo::csi {

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b) noexcept;

// A target posture and the factor it applies to every dynamic-path gain.
struct SensingState {
  std::string name;
  double gamma = 1.0;
};

// Indoor room with fixed transceivers. Gains are linear amplitudes; the
// noise variance is a linear power on the same scale as gain^2.
struct SimScenario {
  double room_width = 4.0;
  double room_height = 3.0;
  std::vector<Point2> tx{{0.1, 1.5}};
  std::vector<Point2> rx{{3.9, 0.5}, {3.9, 2.5}};
  std::size_t subcarriers = 32;
  double carrier_hz = 2.4e9;
  double spacing_hz = 312.5e3;
  double static_gain_ref = 1.0;
  double dynamic_gain_ref = 0.5;
  double noise_variance = 1e-7;
  std::size_t static_paths = 3;
  std::size_t dynamic_paths = 3;
  double grid_spacing = 0.2;
  std::vector<SensingState> states{{"standing", 1.0}, {"sitting", 0.6}, {"lying", 0.3}};

  std::size_t pairs() const noexcept { return tx.size() * rx.size(); }
  std::size_t total_subcarriers() const noexcept { return pairs() * subcarriers; }
  bool contains(Point2 p) const noexcept;

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

// Inclusive grid over the room: floor(W/s)+1 columns by floor(H/s)+1 rows,
// row-major in y then x.
std::vector<Point2> grid_points(const SimScenario& scenario);

}  // namespace mibo::csi
