#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mibo/csi/channel.hpp"
#include "mibo/csi/dataset.hpp"
#include "mibo/models/features.hpp"

namespace mibo::test {

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// One transmitter, one receiver, `subcarriers` tones, `samples` random targets
// cycling through the states. Bypasses scenario validation so tiny problems
// are possible.
inline csi::Dataset toy_dataset(std::size_t subcarriers, std::size_t samples, std::uint64_t seed) {
  csi::Dataset ds;
  ds.scenario.rx = {{3.9, 1.5}};
  ds.scenario.subcarriers = subcarriers;
  ds.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(0.5, 3.5), y(0.3, 2.7);
  for (std::size_t i = 0; i < samples; ++i) {
    csi::CsiSample s;
    s.position = {x(rng), y(rng)};
    s.state = i % ds.scenario.states.size();
    s.slot = i;
    s.h = csi::synthesize_csi(ds.scenario, s.position, s.state, seed, i);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

inline models::TaskTable toy_table(std::size_t subcarriers, std::size_t samples, std::uint64_t seed) {
  auto t = models::TaskTable::from_dataset(toy_dataset(subcarriers, samples, seed));
  std::vector<std::size_t> rows(samples);
  for (std::size_t i = 0; i < samples; ++i) rows[i] = i;
  t.standardize(rows);
  return t;
}

}  // namespace mibo::test
