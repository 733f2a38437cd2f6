#pragma once

#include <span>
#include <vector>

#include "mibo/solver/history.hpp"

namespace mibo::metrics {

// Running averages S(t) = (1/t) sum_{k<=t} x_k of the per-iteration
// quantities ||dw||^2, ||grad_theta||^2 and ||grad_dual||^2.
struct StationaritySeries {
  std::vector<double> s_w;
  std::vector<double> s_u;
  std::vector<double> s_v;
};

std::vector<double> running_average(std::span<const double> values);

StationaritySeries stationarity_series(std::span<const solver::HistoryRow> history);

// Least-squares slope of log S(t) against log t, skipping the first
// `burn_in` fraction of points. Only the fitted points must be positive.
double fit_convergence_slope(std::span<const double> series, double burn_in = 0.1);

}  // namespace mibo::metrics
