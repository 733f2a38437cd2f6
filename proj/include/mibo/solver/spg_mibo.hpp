#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mibo/models/features.hpp"
#include "mibo/models/task_network.hpp"
#include "mibo/solver/history.hpp"
#include "mibo/solver/polytope.hpp"

namespace mibo::solver {

class SolverAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double eta = 0.05;           // base step; eta_t = eta / sqrt(t)
  std::size_t K = 5;           // lower-level gradient steps
  std::optional<double> eps;   // relaxation bound; unset -> eps_scale * L_l(init)
  double eps_scale = 1e-2;
  std::optional<std::size_t> n_min;  // unset -> floor(N_subs / 3)
  std::optional<std::size_t> n_max;  // unset -> floor(N_subs / 2)
  std::size_t T = 2000;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double multiplier_tolerance = 1e-8;
  std::size_t drop_after = 2;
  std::optional<double> lower_eta;   // unset -> eta; decays like eta_t
  bool cold_start = false;           // lower estimate restarts from the initial theta1
  bool lower_commit = true;          // live theta1 adopts the K-step estimate before the Lagrangian step
  double lambda_p = 1.0;             // quadratic penalty weight for the baselines
  double raw_init_range = 0.1;       // sigmoid baselines: raw ~ U(-r, r)
  std::vector<std::size_t> hidden{64, 64};
  models::HeadKind sensing_head = models::HeadKind::measurement;
  std::size_t flush_every = 50;
  std::filesystem::path history_path;  // in-flight history file; empty disables flushing
  // Called with (t, theta1, theta2, w) every observe_every iterations when set.
  std::function<void(std::size_t, const std::vector<double>&, const std::vector<double>&,
                     const std::vector<double>&)>
      observer;
  std::size_t observe_every = 0;

  bool observing(std::size_t t) const { return observer && observe_every > 0 && t % observe_every == 0; }

  // Throws std::invalid_argument on the first violated constraint.
  void validate(std::size_t n_subs) const;
  std::size_t resolved_n_min(std::size_t n_subs) const;
  std::size_t resolved_n_max(std::size_t n_subs) const;
};

// Everything the solver reads but never changes: the two task networks and
// the data they train on.
struct BilevelProblem {
  BilevelProblem(const models::TaskTable& table, std::vector<std::size_t> train_rows,
                 const SolverConfig& config);

  const models::TaskTable* table;
  std::vector<std::size_t> train_rows;
  models::TaskNetwork localization;
  models::TaskNetwork sensing;
  models::HeadKind sensing_head;
  std::size_t n_subs;
  std::size_t n_min;
  std::size_t n_max;
};

struct DualState {
  double mu1 = 0.0;  // N_min - ||w||_1 <= 0
  double mu2 = 0.0;  // ||w||_1 - N_max <= 0
};

struct SolverState {
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> w;
  Polytope polytope;
  DualState dual;
  std::size_t t = 0;
  std::vector<HistoryRow> history;
};

SolverState initial_state(BilevelProblem& problem, const SolverConfig& config);

inline double step_size(double eta, std::size_t t) { return eta / std::sqrt(static_cast<double>(t)); }

struct LowerEstimate {
  std::vector<double> theta1;
  std::vector<double> w;
  double loss = 0.0;  // on the evaluation batch
};

// K gradient steps on L_l over (theta1, w) from the given start, each on its
// own minibatch, then L_l on `eval`. The inputs are not modified.
LowerEstimate estimate_lower_optimum(models::TaskNetwork& localization,
                                     std::span<const double> theta1, std::span<const double> w,
                                     std::span<const models::Batch> steps, const models::Batch& eval,
                                     double eta);

// (L_l(current) - L_l(estimate))^2
inline double J_value(double current_loss, double estimated_loss) {
  const double d = current_loss - estimated_loss;
  return d * d;
}

struct LagrangianParts {
  double loss_s = 0.0;
  double planes = 0.0;       // sum_l lambda_l C_l
  double cardinality = 0.0;  // mu1 (N_min - |w|) + mu2 (|w| - N_max)
  double G = 0.0;
  double total() const noexcept { return loss_s + planes + cardinality + G; }
};

LagrangianParts lagrangian(BilevelProblem& problem, const SolverState& state, const models::Batch& batch);

struct LagrangianGradient {
  std::vector<double> w;
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> plane_values;  // d/d lambda_l
  double d_mu1 = 0.0;
  double d_mu2 = 0.0;
  double loss_s = 0.0;
};

// Gradient of the smooth part (everything but G) unless include_regularizer.
LagrangianGradient lagrangian_gradient(BilevelProblem& problem, const SolverState& state,
                                       const models::Batch& batch, bool include_regularizer = false);

struct StepDiagnostics {
  double eta_t = 0.0;
  double loss_s = 0.0;
  double delta_w_sq = 0.0;
  double grad_u_sq = 0.0;
  double grad_v_sq = 0.0;
};

// One proximal-gradient / projected dual-ascent step at iteration t >= 1.
StepDiagnostics spg_step(BilevelProblem& problem, SolverState& state, const models::Batch& batch,
                         std::size_t t, const SolverConfig& config);

PolytopeEvents update_polytope(SolverState& state, double J, std::span<const double> grad_w,
                               std::span<const double> grad_theta1, double eps,
                               const SolverConfig& config);

struct RunResult {
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> w;
  std::vector<HistoryRow> history;
  double eps = 0.0;
};

RunResult run_spg_mibo(BilevelProblem& problem, const SolverConfig& config);

// Sigmoid-parameterised baselines trained with plain SGD plus the quadratic
// penalty lambda_p * sum (1 - w) w on the selection weights.
RunResult run_penalty_baseline(BilevelProblem& problem, const SolverConfig& config, double lambda_p);

enum class Task { localization, sensing };
RunResult run_single_task(BilevelProblem& problem, Task task, const SolverConfig& config);

}  // namespace mibo::solver
