#include "mibo/autodiff/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace mibo::autodiff {

std::size_t element_count(const std::vector<std::size_t>& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : shape(std::move(dims)), data(element_count(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
  if (element_count(shape) != data.size()) {
    throw std::invalid_argument("tensor shape " + shape_string(shape) + " does not match " +
                                std::to_string(data.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

bool Tensor::all_finite() const noexcept {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace mibo::autodiff
