#include "mibo/solver/proximal.hpp"

#include <stdexcept>
#include <string>

#include "mibo/simd/kernels.hpp"

namespace mibo::solver {
namespace {

void require_unit_box(std::span<const double> w, const char* who) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0 && w[i] <= 1.0)) {
      throw std::invalid_argument(std::string(who) + ": coordinate " + std::to_string(i) + " = " +
                                  std::to_string(w[i]) + " is outside [0, 1]");
    }
  }
}

}  // namespace

double regularizer_G(std::span<const double> w) {
  require_unit_box(w, "regularizer_G");
  return simd::active().integer_distance_sq(w.data(), w.size());
}

std::vector<double> regularizer_gradient(std::span<const double> w) {
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * (w[i] - (w[i] > 0.5 ? 1.0 : 0.0));
  return g;
}

std::vector<double> prox(std::span<const double> w, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("prox: step size must be positive");
  require_unit_box(w, "prox");
  std::vector<double> out(w.size());
  simd::active().prox(w.data(), eta, out.data(), w.size());
  return out;
}

double quadratic_penalty(std::span<const double> w, double lambda_p) {
  double acc = 0.0;
  for (double v : w) acc += (1.0 - v) * v;
  return lambda_p * acc;
}

}  // namespace mibo::solver
