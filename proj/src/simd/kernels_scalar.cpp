#include "mibo/simd/kernels.hpp"

#include <algorithm>

namespace mibo::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* x, const double* gy, double* gx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) gx[i] += gy[i];
  }
}

void prox_scalar(const double* w, double eta, double* out, std::size_t n) {
  const double inv = 1.0 / eta;
  const double denom = inv + 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = w[i] / eta;
    out[i] = w[i] > 0.5 ? (scaled + 2.0) / denom : scaled / denom;
  }
}

double integer_distance_sq_scalar(const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::min(w[i], 1.0 - w[i]);
    acc += d * d;
  }
  return acc;
}

double sum_sq_scalar(const double* x, std::size_t n) { return dot_scalar(x, x, n); }

constexpr KernelTable kScalar{
    Isa::scalar,      dot_scalar,          axpy_scalar,
    mul_scalar,       relu_scalar,         relu_backward_scalar,
    prox_scalar,      integer_distance_sq_scalar, sum_sq_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace mibo::simd
