#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mibo::autodiff {

// Dense row-major tensor of doubles. Ops in this library only ever look at the
// trailing dimension as "columns" and fold everything else into "rows".
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
  Tensor(std::vector<std::size_t> dims, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t size() const noexcept { return data.size(); }
  std::size_t cols() const noexcept { return shape.empty() ? 1 : shape.back(); }
  std::size_t rows() const noexcept { return cols() == 0 ? 0 : size() / cols(); }

  double& operator[](std::size_t i) noexcept { return data[i]; }
  double operator[](std::size_t i) const noexcept { return data[i]; }

  std::span<double> row(std::size_t r) noexcept { return {data.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data.data() + r * cols(), cols()};
  }

  bool all_finite() const noexcept;
};

std::size_t element_count(const std::vector<std::size_t>& shape) noexcept;
std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace mibo::autodiff
