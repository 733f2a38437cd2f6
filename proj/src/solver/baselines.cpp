#include <algorithm>
#include <cmath>
#include <random>

#include "mibo/models/selection.hpp"
#include "mibo/simd/kernels.hpp"
#include "mibo/solver/proximal.hpp"
#include "mibo/solver/sampler.hpp"
#include "mibo/solver/spg_mibo.hpp"

namespace mibo::solver {

using models::Batch;
using models::HeadKind;
using models::SelectionSource;
using models::TaskNetwork;

namespace {

TaskNetwork sigmoid_variant(const TaskNetwork& net) {
  auto spec = net.spec();
  spec.selection = SelectionSource::sigmoid;
  return TaskNetwork(spec);
}

std::vector<double> initial_raw(std::size_t n, double range, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-range, range);
  std::vector<double> raw(n);
  for (auto& r : raw) r = u(rng);
  return raw;
}

std::vector<double> selection_of(std::span<const double> raw) {
  auto s = models::sigmoid_selection_params(raw);
  return {s.relaxed().begin(), s.relaxed().end()};
}

// d/d raw of lambda_p * sum (1 - w) w with w = sigmoid(raw).
void add_penalty_gradient(std::span<const double> w, double lambda_p, std::span<double> grad_raw) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    grad_raw[i] += lambda_p * (1.0 - 2.0 * w[i]) * w[i] * (1.0 - w[i]);
  }
}

void require_finite(std::span<const double> v, const char* block, std::size_t t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw SolverAbort("non-finite gradient in block '" + std::string(block) + "' at iteration " +
                        std::to_string(t));
    }
  }
}

HistoryRow baseline_row(std::size_t t, double eta_t, double loss_s, double loss_l,
                        std::span<const double> w, std::span<const double> w_prev, double grad_u_sq) {
  HistoryRow row;
  row.iter = t;
  row.eta_t = eta_t;
  row.loss_s = loss_s;
  row.loss_l = loss_l;
  row.G = regularizer_G(w);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - w_prev[i];
    row.delta_w_sq += d * d;
  }
  row.grad_u_sq = grad_u_sq;
  return row;
}

}  // namespace

RunResult run_penalty_baseline(BilevelProblem& problem, const SolverConfig& config, double lambda_p) {
  if (!(lambda_p > 0.0)) throw std::invalid_argument("penalty baseline: lambda_p must be positive");
  const auto& table = *problem.table;
  TaskNetwork loc = sigmoid_variant(problem.localization);
  TaskNetwork sen = sigmoid_variant(problem.sensing);

  RunResult result;
  result.theta1 = loc.init_parameters(config.seed * 2 + 1);
  result.theta2 = sen.init_parameters(config.seed * 2 + 2);
  auto raw = initial_raw(problem.n_subs, config.raw_init_range, config.seed * 2 + 3);
  auto w = selection_of(raw);

  MinibatchSampler loc_rows(problem.train_rows, config.batch_size, config.seed * 7919 + 13);
  MinibatchSampler sen_rows(problem.train_rows, config.batch_size, config.seed * 7919 + 11);
  HistoryFlusher flusher;
  if (!config.history_path.empty()) flusher = HistoryFlusher(config.history_path, config.flush_every);

  for (std::size_t t = 1; t <= config.T; ++t) {
    const double eta_t = step_size(config.eta, t);
    const Batch lb = table.batch(loc_rows.next(), HeadKind::position);
    const Batch sb = table.batch(sen_rows.next(), problem.sensing_head);
    auto el = loc.evaluate(lb, result.theta1, raw, true);
    auto es = sen.evaluate(sb, result.theta2, raw, true);

    std::vector<double> grad_raw(raw.size(), 0.0);
    simd::axpy(1.0, el.grad_selection, grad_raw);
    simd::axpy(1.0, es.grad_selection, grad_raw);
    add_penalty_gradient(w, lambda_p, grad_raw);
    require_finite(el.grad_theta, "theta1", t);
    require_finite(es.grad_theta, "theta2", t);
    require_finite(grad_raw, "w", t);

    simd::axpy(-eta_t, el.grad_theta, result.theta1);
    simd::axpy(-eta_t, es.grad_theta, result.theta2);
    simd::axpy(-eta_t, grad_raw, raw);
    const auto w_prev = w;
    w = selection_of(raw);
    const double gu = simd::sum_sq(el.grad_theta) + simd::sum_sq(es.grad_theta);
    result.history.push_back(baseline_row(t, eta_t, es.loss, el.loss, w, w_prev, gu));
    flusher.maybe_flush(result.history);
    if (config.observing(t)) config.observer(t, result.theta1, result.theta2, w);
  }
  flusher.finish();
  result.w = std::move(w);
  return result;
}

RunResult run_single_task(BilevelProblem& problem, Task task, const SolverConfig& config) {
  const auto& table = *problem.table;
  const bool is_loc = task == Task::localization;
  TaskNetwork net = sigmoid_variant(is_loc ? problem.localization : problem.sensing);
  const HeadKind head = is_loc ? HeadKind::position : problem.sensing_head;

  RunResult result;
  result.theta1 = problem.localization.init_parameters(config.seed * 2 + 1);
  result.theta2 = problem.sensing.init_parameters(config.seed * 2 + 2);
  auto& theta = is_loc ? result.theta1 : result.theta2;
  auto raw = initial_raw(problem.n_subs, config.raw_init_range, config.seed * 2 + 3);
  auto w = selection_of(raw);

  MinibatchSampler rows(problem.train_rows, config.batch_size, config.seed * 7919 + (is_loc ? 13 : 11));
  HistoryFlusher flusher;
  if (!config.history_path.empty()) flusher = HistoryFlusher(config.history_path, config.flush_every);

  for (std::size_t t = 1; t <= config.T; ++t) {
    const double eta_t = step_size(config.eta, t);
    const Batch b = table.batch(rows.next(), head);
    auto e = net.evaluate(b, theta, raw, true);
    add_penalty_gradient(w, config.lambda_p, e.grad_selection);
    require_finite(e.grad_theta, is_loc ? "theta1" : "theta2", t);
    require_finite(e.grad_selection, "w", t);
    simd::axpy(-eta_t, e.grad_theta, theta);
    simd::axpy(-eta_t, e.grad_selection, raw);
    const auto w_prev = w;
    w = selection_of(raw);
    const double gu = simd::sum_sq(e.grad_theta);
    result.history.push_back(is_loc ? baseline_row(t, eta_t, 0.0, e.loss, w, w_prev, gu)
                                    : baseline_row(t, eta_t, e.loss, 0.0, w, w_prev, gu));
    flusher.maybe_flush(result.history);
    if (config.observing(t)) config.observer(t, result.theta1, result.theta2, w);
  }
  flusher.finish();
  result.w = std::move(w);
  return result;
}

}  // namespace mibo::solver
