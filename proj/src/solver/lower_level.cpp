#include <algorithm>

#include "mibo/simd/kernels.hpp"
#include "mibo/solver/spg_mibo.hpp"

namespace mibo::solver {

LowerEstimate estimate_lower_optimum(models::TaskNetwork& localization,
                                     std::span<const double> theta1, std::span<const double> w,
                                     std::span<const models::Batch> steps, const models::Batch& eval,
                                     double eta) {
  LowerEstimate est{{theta1.begin(), theta1.end()}, {w.begin(), w.end()}, 0.0};
  for (const auto& batch : steps) {
    const auto e = localization.evaluate(batch, est.theta1, est.w, true);
    simd::axpy(-eta, e.grad_theta, est.theta1);
    for (std::size_t i = 0; i < est.w.size(); ++i) {
      est.w[i] = std::clamp(est.w[i] - eta * e.grad_selection[i], 0.0, 1.0);
    }
  }
  est.loss = localization.loss(eval, est.theta1, est.w);
  return est;
}

}  // namespace mibo::solver
