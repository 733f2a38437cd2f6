#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mibo::solver {

// Epoch-wise shuffled minibatches over a fixed row set. Batches never straddle
// an epoch boundary; the last batch of an epoch may be short.
class MinibatchSampler {
 public:
  MinibatchSampler(std::vector<std::size_t> rows, std::size_t batch_size, std::uint64_t seed);

  std::vector<std::size_t> next();
  std::size_t batches_per_epoch() const noexcept;

 private:
  void reshuffle();

  std::vector<std::size_t> rows_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace mibo::solver
