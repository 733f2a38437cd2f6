#include "mibo/models/selection.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mibo::models {

SelectionState::SelectionState(std::vector<double> relaxed) : relaxed_(std::move(relaxed)) {
  for (std::size_t i = 0; i < relaxed_.size(); ++i) {
    if (!(relaxed_[i] >= 0.0 && relaxed_[i] <= 1.0)) {
      throw std::invalid_argument("selection coordinate " + std::to_string(i) + " = " +
                                  std::to_string(relaxed_[i]) + " is outside [0, 1]");
    }
  }
}

SelectionState SelectionState::uniform(std::size_t n, double value) {
  return SelectionState(std::vector<double>(n, value));
}

std::vector<std::uint8_t> SelectionState::rounding() const {
  std::vector<std::uint8_t> out(relaxed_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = relaxed_[i] > 0.5 ? 1 : 0;
  return out;
}

std::vector<double> round_half_down(std::span<const double> w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] > 0.5 ? 1.0 : 0.0;
  return out;
}

std::vector<double> apply_selection(std::span<const double> features, std::span<const double> w,
                                    csi::FeatureMode mode) {
  const std::size_t per = csi::features_per_subcarrier(mode);
  if (features.size() != w.size() * per) {
    throw std::invalid_argument("apply_selection: " + std::to_string(features.size()) +
                                " features for " + std::to_string(w.size()) + " subcarriers");
  }
  std::vector<double> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out[i] = features[i] * w[i / per];
  return out;
}

SelectionState sigmoid_selection_params(std::span<const double> raw) {
  std::vector<double> w(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double x = raw[i];
    w[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return SelectionState(std::move(w));
}

}  // namespace mibo::models
