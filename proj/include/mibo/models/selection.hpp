#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mibo/csi/dataset.hpp"

namespace mibo::models {

// Relaxed subcarrier-selection vector in [0,1]^N_subs.
class SelectionState {
 public:
  SelectionState() = default;
  explicit SelectionState(std::vector<double> relaxed);  // throws if any coordinate leaves [0,1]
  static SelectionState uniform(std::size_t n, double value = 0.5);

  std::span<const double> relaxed() const noexcept { return relaxed_; }
  std::size_t size() const noexcept { return relaxed_.size(); }
  double operator[](std::size_t i) const noexcept { return relaxed_[i]; }

  // 1 iff the coordinate is strictly above 1/2.
  std::vector<std::uint8_t> rounding() const;

 private:
  std::vector<double> relaxed_;
};

std::vector<double> round_half_down(std::span<const double> w);

// Scales each subcarrier's features by its weight. With stacked features both
// components of subcarrier i are scaled by w[i].
std::vector<double> apply_selection(std::span<const double> features, std::span<const double> w,
                                    csi::FeatureMode mode);

SelectionState sigmoid_selection_params(std::span<const double> raw);

}  // namespace mibo::models
