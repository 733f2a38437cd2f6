#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mibo/simd/kernels.hpp"

namespace mibo::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(MIBO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("MIBO_SIMD"); forced && std::string(forced) == "scalar") {
    return scalar_kernels();
  }
#if defined(MIBO_HAVE_AVX2)
  if (cpu_has_avx2()) return avx2_kernels();
#endif
  return scalar_kernels();
}

}  // namespace

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw std::runtime_error("kernel set '" + std::string(isa_name(isa)) + "' not available on this CPU");
  }
#if defined(MIBO_HAVE_AVX2)
  if (isa == Isa::avx2) return avx2_kernels();
#endif
  return scalar_kernels();
}

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

}  // namespace mibo::simd
