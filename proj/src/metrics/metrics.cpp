#include "mibo/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mibo/models/selection.hpp"

namespace mibo::metrics {

using autodiff::Tensor;

double integer_feasibility_gap(std::span<const double> w) {
  double num = 0.0;
  double den = 0.0;
  const auto r = models::round_half_down(w);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0 && w[i] <= 1.0)) {
      throw std::invalid_argument("integer_feasibility_gap: coordinate " + std::to_string(i) +
                                  " outside [0,1]");
    }
    num += (w[i] - r[i]) * (w[i] - r[i]);
    den += r[i] * r[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1.0);
}

double mean_squared_error(const Tensor& predictions, const Tensor& targets) {
  if (predictions.shape != targets.shape) {
    throw std::invalid_argument("mse: shape mismatch " + autodiff::shape_string(predictions.shape) +
                                " vs " + autodiff::shape_string(targets.shape));
  }
  if (predictions.data.empty()) throw std::invalid_argument("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.data.size(); ++i) {
    const double d = predictions.data[i] - targets.data[i];
    s += d * d;
  }
  return s / static_cast<double>(predictions.data.size());
}

namespace {

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

double accuracy(const Tensor& predictions, const Tensor& targets) {
  if (predictions.shape.size() != 2) throw std::invalid_argument("accuracy: predictions must be [B x C]");
  const std::size_t rows = predictions.shape[0];
  const bool labels = targets.shape.size() == 1;
  if (labels ? targets.shape[0] != rows : targets.shape != predictions.shape) {
    throw std::invalid_argument("accuracy: shape mismatch " + autodiff::shape_string(predictions.shape) +
                                " vs " + autodiff::shape_string(targets.shape));
  }
  if (rows == 0) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t truth = labels ? static_cast<std::size_t>(targets.data[r]) : argmax(targets.row(r));
    hits += argmax(predictions.row(r)) == truth;
  }
  return static_cast<double>(hits) / static_cast<double>(rows);
}

double task_metric(const Tensor& predictions, const Tensor& targets, models::HeadKind head) {
  if (head == models::HeadKind::classification) return accuracy(predictions, targets);
  return mean_squared_error(predictions, targets);
}

}  // namespace mibo::metrics
