#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mibo/csi/scenario.hpp"

namespace mibo::csi {

enum class PathKind { static_path, dynamic_path };

struct Path {
  std::size_t pair = 0;  // tx-major: pair = tx_index * rx_count + rx_index
  PathKind kind = PathKind::static_path;
  double length = 0.0;   // meters
};

// Static paths per pair: the direct ray, then single-bounce wall reflections
// (mirror images of the transmitter across y=0, y=H, x=0, x=W in that order),
// truncated to scenario.static_paths. Dynamic paths per pair (only when a
// target is given): tx -> target -> rx, then tx -> target -> wall -> rx using
// the same mirror order on the receiver, truncated to scenario.dynamic_paths.
std::vector<Path> path_geometry(const SimScenario& scenario, std::optional<Point2> target);

// Free-space amplitude laws.
double static_gain(double a0, double d);
double dynamic_gain(double b0, double gamma, double d);
inline double path_delay(double d) noexcept { return d / kSpeedOfLight; }

// One propagation term of the superposition.
struct PathTerm {
  double gain = 0.0;
  double delay = 0.0;  // seconds
  double phase = 0.0;  // radians
};

// out[m] += sum_k gain_k * exp(j(2*pi*(f0 + m*df)*delay_k + phase_k))
void accumulate_paths(std::span<const PathTerm> terms, double f0, double df,
                      std::span<std::complex<double>> out);

// Complex channel matrix, pairs x subcarriers, row-major.
struct CsiMatrix {
  std::size_t pairs = 0;
  std::size_t subcarriers = 0;
  std::vector<std::complex<double>> values;

  CsiMatrix() = default;
  CsiMatrix(std::size_t p, std::size_t m) : pairs(p), subcarriers(m), values(p * m) {}
  std::complex<double>& at(std::size_t p, std::size_t m) { return values[p * subcarriers + m]; }
  std::complex<double> at(std::size_t p, std::size_t m) const { return values[p * subcarriers + m]; }
};

// Deterministic stream keyed by (seed, stream, counter); each key yields an
// independent mt19937_64 state, so samples can be drawn in any order.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
  double uniform();  // [0, 1)
  double normal();   // standard normal, Box-Muller
 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct SynthesisOptions {
  bool include_static = true;
  bool include_dynamic = true;
  bool include_noise = true;
};

// Static phases depend only on the seed; dynamic phases and noise on
// (seed, slot). Disabling a component leaves the other components' random
// draws unchanged, so the parts superpose exactly.
CsiMatrix synthesize_csi(const SimScenario& scenario, std::optional<Point2> target,
                         std::size_t state, std::uint64_t seed, std::uint64_t slot,
                         SynthesisOptions options = {});

}  // namespace mibo::csi
