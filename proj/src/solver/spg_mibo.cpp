#include "mibo/solver/spg_mibo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mibo/simd/kernels.hpp"
#include "mibo/solver/proximal.hpp"
#include "mibo/solver/sampler.hpp"

namespace mibo::solver {

using models::Batch;
using models::HeadKind;
using models::NetworkSpec;

void SolverConfig::validate(std::size_t n_subs) const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("solver: " + m); };
  if (!(eta > 0.0)) fail("eta must be positive");
  if (K < 1) fail("K must be at least 1");
  if (eps && !(*eps > 0.0)) fail("eps must be positive");
  if (!(eps_scale > 0.0)) fail("eps_scale must be positive");
  if (T < 1) fail("T must be at least 1");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (lower_eta && !(*lower_eta > 0.0)) fail("lower_eta must be positive");
  if (!(lambda_p > 0.0)) fail("lambda_p must be positive");
  if (drop_after < 1) fail("drop_after must be at least 1");
  if (multiplier_tolerance < 0.0) fail("multiplier_tolerance must be non-negative");
  if (hidden.empty()) fail("at least one hidden layer is required");
  const std::size_t lo = resolved_n_min(n_subs);
  const std::size_t hi = resolved_n_max(n_subs);
  if (lo > hi) fail("n_min (" + std::to_string(lo) + ") exceeds n_max (" + std::to_string(hi) + ")");
  if (hi > n_subs) fail("n_max (" + std::to_string(hi) + ") exceeds N_subs (" + std::to_string(n_subs) + ")");
}

std::size_t SolverConfig::resolved_n_min(std::size_t n_subs) const { return n_min.value_or(n_subs / 3); }
std::size_t SolverConfig::resolved_n_max(std::size_t n_subs) const { return n_max.value_or(n_subs / 2); }

namespace {

NetworkSpec make_spec(const models::TaskTable& table, const SolverConfig& config, HeadKind head) {
  NetworkSpec spec;
  spec.subcarriers = table.subcarriers();
  spec.mode = table.mode();
  spec.hidden = config.hidden;
  spec.head = head;
  spec.outputs = table.outputs(head);
  return spec;
}

void require_finite(std::span<const double> v, const char* block, std::size_t t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw SolverAbort("non-finite gradient in block '" + std::string(block) + "' at iteration " +
                        std::to_string(t));
    }
  }
}

// Projected-gradient mapping of a non-negative multiplier.
double projected_ascent(double x, double grad, double eta) {
  return (std::max(0.0, x + eta * grad) - x) / eta;
}

}  // namespace

BilevelProblem::BilevelProblem(const models::TaskTable& tbl, std::vector<std::size_t> rows,
                               const SolverConfig& config)
    : table(&tbl),
      train_rows(std::move(rows)),
      localization(make_spec(tbl, config, HeadKind::position)),
      sensing(make_spec(tbl, config, config.sensing_head)),
      sensing_head(config.sensing_head),
      n_subs(tbl.subcarriers()),
      n_min(config.resolved_n_min(tbl.subcarriers())),
      n_max(config.resolved_n_max(tbl.subcarriers())) {
  config.validate(n_subs);
  if (train_rows.empty()) throw std::invalid_argument("problem needs at least one training row");
}

SolverState initial_state(BilevelProblem& problem, const SolverConfig& config) {
  SolverState s;
  s.theta1 = problem.localization.init_parameters(config.seed * 2 + 1);
  s.theta2 = problem.sensing.init_parameters(config.seed * 2 + 2);
  s.w.assign(problem.n_subs, 0.5);
  s.polytope = Polytope(problem.n_subs, s.theta1.size());
  return s;
}

StepDiagnostics spg_step(BilevelProblem& problem, SolverState& state, const Batch& batch,
                         std::size_t t, const SolverConfig& config) {
  if (t < 1) throw std::invalid_argument("spg_step: iteration index starts at 1");
  const double eta_t = step_size(config.eta, t);
  auto g = lagrangian_gradient(problem, state, batch, false);
  require_finite(g.w, "w", t);
  require_finite(g.theta1, "theta1", t);
  require_finite(g.theta2, "theta2", t);
  require_finite(g.plane_values, "lambda", t);
  if (!std::isfinite(g.d_mu1) || !std::isfinite(g.d_mu2)) {
    throw SolverAbort("non-finite gradient in block 'mu' at iteration " + std::to_string(t));
  }

  StepDiagnostics d;
  d.eta_t = eta_t;
  d.loss_s = g.loss_s;
  d.grad_u_sq = simd::sum_sq(g.theta1) + simd::sum_sq(g.theta2);
  for (std::size_t l = 0; l < g.plane_values.size(); ++l) {
    const double p = projected_ascent(state.polytope.planes()[l].multiplier, g.plane_values[l], eta_t);
    d.grad_v_sq += p * p;
  }
  const double p1 = projected_ascent(state.dual.mu1, g.d_mu1, eta_t);
  const double p2 = projected_ascent(state.dual.mu2, g.d_mu2, eta_t);
  d.grad_v_sq += p1 * p1 + p2 * p2;

  std::vector<double> shifted(state.w.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = std::clamp(state.w[i] - eta_t * g.w[i], 0.0, 1.0);
  }
  auto next_w = prox(shifted, eta_t);
  for (std::size_t i = 0; i < next_w.size(); ++i) {
    const double dw = next_w[i] - state.w[i];
    d.delta_w_sq += dw * dw;
  }
  state.w = std::move(next_w);
  simd::axpy(-eta_t, g.theta1, state.theta1);
  simd::axpy(-eta_t, g.theta2, state.theta2);
  state.polytope.ascend(g.plane_values, eta_t);
  state.dual.mu1 = std::max(0.0, state.dual.mu1 + eta_t * g.d_mu1);
  state.dual.mu2 = std::max(0.0, state.dual.mu2 + eta_t * g.d_mu2);
  state.t = t;
  return d;
}

PolytopeEvents update_polytope(SolverState& state, double J, std::span<const double> grad_w,
                               std::span<const double> grad_theta1, double eps,
                               const SolverConfig& config) {
  return state.polytope.update(J, grad_w, grad_theta1, state.w, state.theta1, eps,
                               config.multiplier_tolerance, config.drop_after);
}

RunResult run_spg_mibo(BilevelProblem& problem, const SolverConfig& config) {
  const auto& table = *problem.table;
  SolverState state = initial_state(problem, config);
  const std::vector<double> theta1_init = state.theta1;

  RunResult result;
  const Batch train_loc = table.batch(problem.train_rows, HeadKind::position);
  result.eps = config.eps.value_or(config.eps_scale *
                                   problem.localization.loss(train_loc, state.theta1, state.w));
  const double lower_eta = config.lower_eta.value_or(config.eta);

  MinibatchSampler upper(problem.train_rows, config.batch_size, config.seed * 7919 + 11);
  MinibatchSampler lower(problem.train_rows, config.batch_size, config.seed * 7919 + 13);
  HistoryFlusher flusher;
  if (!config.history_path.empty()) flusher = HistoryFlusher(config.history_path, config.flush_every);

  std::vector<Batch> lower_batches(config.K);
  for (std::size_t t = 1; t <= config.T; ++t) {
    for (auto& b : lower_batches) b = table.batch(lower.next(), HeadKind::position);
    const Batch eval = table.batch(lower.next(), HeadKind::position);
    const Batch upper_batch = table.batch(upper.next(), problem.sensing_head);

    const auto& start = config.cold_start ? theta1_init : state.theta1;
    auto est = estimate_lower_optimum(problem.localization, start, state.w, lower_batches, eval,
                                      step_size(lower_eta, t));
    if (config.lower_commit) state.theta1 = est.theta1;

    const auto step = spg_step(problem, state, upper_batch, t, config);

    const auto now = problem.localization.evaluate(eval, state.theta1, state.w, true);
    const double J = J_value(now.loss, est.loss);
    const double scale = 2.0 * (now.loss - est.loss);
    std::vector<double> grad_w(now.grad_selection);
    std::vector<double> grad_theta(now.grad_theta);
    for (auto& v : grad_w) v *= scale;
    for (auto& v : grad_theta) v *= scale;
    update_polytope(state, J, grad_w, grad_theta, result.eps, config);

    HistoryRow row;
    row.iter = t;
    row.eta_t = step.eta_t;
    row.loss_s = step.loss_s;
    row.loss_l = now.loss;
    row.J = J;
    row.G = regularizer_G(state.w);
    row.delta_w_sq = step.delta_w_sq;
    row.num_planes = state.polytope.size();
    row.mu1 = state.dual.mu1;
    row.mu2 = state.dual.mu2;
    row.lambda_sum = state.polytope.lambda_sum();
    row.grad_u_sq = step.grad_u_sq;
    row.grad_v_sq = step.grad_v_sq;
    state.history.push_back(row);
    flusher.maybe_flush(state.history);
    if (config.observing(t)) config.observer(t, state.theta1, state.theta2, state.w);
  }
  flusher.finish();

  result.theta1 = std::move(state.theta1);
  result.theta2 = std::move(state.theta2);
  result.w = std::move(state.w);
  result.history = std::move(state.history);
  return result;
}

}  // namespace mibo::solver
