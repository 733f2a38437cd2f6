#include <immintrin.h>

#include <algorithm>

#include "mibo/simd/kernels.hpp"

namespace mibo::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_avx2(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_and_pd(v, _mm256_cmp_pd(v, zero, _CMP_GT_OQ)));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_avx2(const double* x, const double* gy, double* gx, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(_mm256_loadu_pd(gy + i), mask);
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), g));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) gx[i] += gy[i];
  }
}

// Same operation sequence as the scalar reference, so results are bit-identical.
void prox_avx2(const double* w, double eta, double* out, std::size_t n) {
  const double inv = 1.0 / eta;
  const double denom = inv + 2.0;
  const __m256d veta = _mm256_set1_pd(eta);
  const __m256d vden = _mm256_set1_pd(denom);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(w + i);
    const __m256d scaled = _mm256_div_pd(v, veta);
    const __m256d lower = _mm256_div_pd(scaled, vden);
    const __m256d upper = _mm256_div_pd(_mm256_add_pd(scaled, two), vden);
    const __m256d take_upper = _mm256_cmp_pd(v, half, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(lower, upper, take_upper));
  }
  for (; i < n; ++i) {
    const double scaled = w[i] / eta;
    out[i] = w[i] > 0.5 ? (scaled + 2.0) / denom : scaled / denom;
  }
}

double integer_distance_sq_avx2(const double* w, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(w + i);
    const __m256d d = _mm256_min_pd(v, _mm256_sub_pd(one, v));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double d = std::min(w[i], 1.0 - w[i]);
    total += d * d;
  }
  return total;
}

double sum_sq_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

constexpr KernelTable kAvx2{
    Isa::avx2,      dot_avx2,          axpy_avx2,
    mul_avx2,       relu_avx2,         relu_backward_avx2,
    prox_avx2,      integer_distance_sq_avx2, sum_sq_avx2,
};

}  // namespace

const KernelTable& avx2_kernels() noexcept { return kAvx2; }

}  // namespace mibo::simd
