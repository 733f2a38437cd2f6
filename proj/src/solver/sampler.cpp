#include "mibo/solver/sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace mibo::solver {

MinibatchSampler::MinibatchSampler(std::vector<std::size_t> rows, std::size_t batch_size,
                                   std::uint64_t seed)
    : rows_(std::move(rows)), batch_size_(batch_size), rng_(seed) {
  if (rows_.empty()) throw std::invalid_argument("sampler needs at least one row");
  if (batch_size_ == 0) throw std::invalid_argument("batch size must be positive");
  reshuffle();
}

void MinibatchSampler::reshuffle() {
  std::shuffle(rows_.begin(), rows_.end(), rng_);
  cursor_ = 0;
}

std::vector<std::size_t> MinibatchSampler::next() {
  if (cursor_ >= rows_.size()) reshuffle();
  const std::size_t end = std::min(rows_.size(), cursor_ + batch_size_);
  std::vector<std::size_t> out(rows_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                               rows_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return out;
}

std::size_t MinibatchSampler::batches_per_epoch() const noexcept {
  return (rows_.size() + batch_size_ - 1) / batch_size_;
}

}  // namespace mibo::solver
