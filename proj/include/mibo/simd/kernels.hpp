#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision kernels behind the autodiff engine and the proximal
// machinery. Every routine has a portable scalar reference; wider variants
// are picked once at startup from the CPU's feature bits. Set MIBO_SIMD=scalar
// in the environment to pin the reference path.

namespace mibo::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = a * b (elementwise)
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*relu)(const double* x, double* y, std::size_t n);
  // gx += gy where x > 0
  void (*relu_backward)(const double* x, const double* gy, double* gx, std::size_t n);
  // closed-form proximal map of the integer-distance regularizer
  void (*prox)(const double* w, double eta, double* out, std::size_t n);
  // sum_i min(w_i, 1 - w_i)^2
  double (*integer_distance_sq)(const double* w, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
#if defined(MIBO_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif

bool isa_available(Isa isa) noexcept;
const KernelTable& kernels_for(Isa isa);
const KernelTable& active() noexcept;
std::string_view isa_name(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_sq(std::span<const double> x) noexcept {
  return active().sum_sq(x.data(), x.size());
}

}  // namespace mibo::simd
