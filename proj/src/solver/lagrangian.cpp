#include <numeric>

#include "mibo/solver/proximal.hpp"
#include "mibo/solver/spg_mibo.hpp"

namespace mibo::solver {

LagrangianParts lagrangian(BilevelProblem& problem, const SolverState& state,
                           const models::Batch& batch) {
  LagrangianParts parts;
  parts.loss_s = problem.sensing.loss(batch, state.theta2, state.w);
  const auto values = state.polytope.values(state.w, state.theta1);
  parts.planes = state.polytope.weighted_sum(values);
  const double l1 = std::accumulate(state.w.begin(), state.w.end(), 0.0);
  parts.cardinality = state.dual.mu1 * (static_cast<double>(problem.n_min) - l1) +
                      state.dual.mu2 * (l1 - static_cast<double>(problem.n_max));
  parts.G = regularizer_G(state.w);
  return parts;
}

LagrangianGradient lagrangian_gradient(BilevelProblem& problem, const SolverState& state,
                                       const models::Batch& batch, bool include_regularizer) {
  LagrangianGradient g;
  auto sen = problem.sensing.evaluate(batch, state.theta2, state.w, true);
  g.loss_s = sen.loss;
  g.theta2 = std::move(sen.grad_theta);
  g.w = std::move(sen.grad_selection);
  g.theta1.assign(state.theta1.size(), 0.0);
  state.polytope.accumulate_gradients(g.w, g.theta1);
  // ||w||_1 = sum w on the unit box
  const double card = state.dual.mu2 - state.dual.mu1;
  for (auto& v : g.w) v += card;
  if (include_regularizer) {
    const auto gr = regularizer_gradient(state.w);
    for (std::size_t i = 0; i < g.w.size(); ++i) g.w[i] += gr[i];
  }
  g.plane_values = state.polytope.values(state.w, state.theta1);
  const double l1 = std::accumulate(state.w.begin(), state.w.end(), 0.0);
  g.d_mu1 = static_cast<double>(problem.n_min) - l1;
  g.d_mu2 = l1 - static_cast<double>(problem.n_max);
  return g;
}

}  // namespace mibo::solver
