#include "mibo/csi/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mibo::csi {
namespace {

constexpr std::uint64_t kStaticPhaseStream = 1;
constexpr std::uint64_t kDynamicPhaseStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mirror image across wall k: 0 -> y=0, 1 -> y=H, 2 -> x=0, 3 -> x=W.
Point2 mirror(const SimScenario& sc, Point2 p, std::size_t wall) {
  switch (wall) {
    case 0: return {p.x, -p.y};
    case 1: return {p.x, 2.0 * sc.room_height - p.y};
    case 2: return {-p.x, p.y};
    default: return {2.0 * sc.room_width - p.x, p.y};
  }
}

}  // namespace

KeyedRng::KeyedRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
    : engine_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter)) {}

double KeyedRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double KeyedRng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  return r * std::cos(a);
}

std::vector<Path> path_geometry(const SimScenario& sc, std::optional<Point2> target) {
  if (target) {
    if (!sc.contains(*target)) throw std::invalid_argument("path_geometry: target outside the room");
    for (const auto& t : sc.tx) {
      if (distance(t, *target) < 1e-12) {
        throw std::invalid_argument("path_geometry: target coincides with a transmitter");
      }
    }
    for (const auto& r : sc.rx) {
      if (distance(r, *target) < 1e-12) {
        throw std::invalid_argument("path_geometry: target coincides with a receiver");
      }
    }
  }
  std::vector<Path> paths;
  for (std::size_t ti = 0; ti < sc.tx.size(); ++ti) {
    for (std::size_t ri = 0; ri < sc.rx.size(); ++ri) {
      const std::size_t pair = ti * sc.rx.size() + ri;
      const Point2 t = sc.tx[ti];
      const Point2 r = sc.rx[ri];
      for (std::size_t k = 0; k < sc.static_paths; ++k) {
        const Point2 src = k == 0 ? t : mirror(sc, t, k - 1);
        const double d = distance(src, r);
        if (d <= 0.0) throw std::invalid_argument("path_geometry: transmitter coincides with receiver");
        paths.push_back({pair, PathKind::static_path, d});
      }
      if (!target) continue;
      const double leg = distance(t, *target);
      for (std::size_t k = 0; k < sc.dynamic_paths; ++k) {
        const Point2 dst = k == 0 ? r : mirror(sc, r, k - 1);
        paths.push_back({pair, PathKind::dynamic_path, leg + distance(*target, dst)});
      }
    }
  }
  return paths;
}

double static_gain(double a0, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("static_gain: path length must be positive");
  return a0 / (d * d);
}

double dynamic_gain(double b0, double gamma, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("dynamic_gain: path length must be positive");
  if (gamma < 0.0) throw std::invalid_argument("dynamic_gain: gamma must be non-negative");
  return b0 * gamma / (d * d);
}

void accumulate_paths(std::span<const PathTerm> terms, double f0, double df,
                      std::span<std::complex<double>> out) {
  for (const auto& term : terms) {
    for (std::size_t m = 0; m < out.size(); ++m) {
      const double f = f0 + static_cast<double>(m) * df;
      out[m] += std::polar(term.gain, 2.0 * std::numbers::pi * f * term.delay + term.phase);
    }
  }
}

CsiMatrix synthesize_csi(const SimScenario& sc, std::optional<Point2> target, std::size_t state,
                         std::uint64_t seed, std::uint64_t slot, SynthesisOptions options) {
  if (state >= sc.states.size()) {
    throw std::invalid_argument("synthesize_csi: state index " + std::to_string(state) +
                                " out of range");
  }
  const auto paths = path_geometry(sc, target);
  const double gamma = sc.states[state].gamma;
  CsiMatrix h(sc.pairs(), sc.subcarriers);

  KeyedRng static_phases(seed, kStaticPhaseStream, 0);
  KeyedRng dynamic_phases(seed, kDynamicPhaseStream, slot);
  std::vector<PathTerm> terms;
  std::size_t current_pair = 0;
  auto flush = [&](std::size_t pair) {
    std::span<std::complex<double>> row(h.values.data() + pair * sc.subcarriers, sc.subcarriers);
    accumulate_paths(terms, sc.carrier_hz, sc.spacing_hz, row);
    terms.clear();
  };
  for (const auto& p : paths) {
    if (p.pair != current_pair) {
      flush(current_pair);
      current_pair = p.pair;
    }
    // Draw every phase regardless of the options so each component sees the
    // same random stream whether or not the others are enabled.
    if (p.kind == PathKind::static_path) {
      const double phase = 2.0 * std::numbers::pi * static_phases.uniform();
      if (options.include_static) {
        terms.push_back({static_gain(sc.static_gain_ref, p.length), path_delay(p.length), phase});
      }
    } else {
      const double phase = 2.0 * std::numbers::pi * dynamic_phases.uniform();
      if (options.include_dynamic) {
        terms.push_back({dynamic_gain(sc.dynamic_gain_ref, gamma, p.length), path_delay(p.length), phase});
      }
    }
  }
  if (!paths.empty()) flush(current_pair);

  if (options.include_noise && sc.noise_variance > 0.0) {
    KeyedRng noise(seed, kNoiseStream, slot);
    const double sd = std::sqrt(sc.noise_variance / 2.0);
    for (auto& v : h.values) {
      const double re = noise.normal();
      const double im = noise.normal();
      v += std::complex<double>(sd * re, sd * im);
    }
  }
  return h;
}

}  // namespace mibo::csi
