#include "mibo/metrics/stationarity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mibo::metrics {

std::vector<double> running_average(std::span<const double> values) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    out[i] = sum / static_cast<double>(i + 1);
  }
  return out;
}

StationaritySeries stationarity_series(std::span<const solver::HistoryRow> history) {
  if (history.empty()) throw std::invalid_argument("stationarity_series: empty history");
  std::vector<double> dw, gu, gv;
  dw.reserve(history.size());
  gu.reserve(history.size());
  gv.reserve(history.size());
  for (const auto& row : history) {
    if (row.delta_w_sq < 0.0 || row.grad_u_sq < 0.0 || row.grad_v_sq < 0.0) {
      throw std::invalid_argument("stationarity_series: negative squared norm at iteration " +
                                  std::to_string(row.iter));
    }
    dw.push_back(row.delta_w_sq);
    gu.push_back(row.grad_u_sq);
    gv.push_back(row.grad_v_sq);
  }
  return {running_average(dw), running_average(gu), running_average(gv)};
}

double fit_convergence_slope(std::span<const double> series, double burn_in) {
  if (series.size() < 20) {
    throw std::invalid_argument("fit_convergence_slope: need at least 20 points, got " +
                                std::to_string(series.size()));
  }
  if (burn_in < 0.0 || burn_in >= 1.0) throw std::invalid_argument("fit_convergence_slope: burn-in fraction must be in [0,1)");
  const auto start = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(series.size())));
  for (std::size_t i = start; i < series.size(); ++i) {
    if (!(series[i] > 0.0) || !std::isfinite(series[i])) {
      throw std::invalid_argument("fit_convergence_slope: value at t=" + std::to_string(i + 1) +
                                  " is not positive");
    }
  }
  const double n = static_cast<double>(series.size() - start);
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = start; i < series.size(); ++i) {
    sx += std::log(static_cast<double>(i + 1));
    sy += std::log(series[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = start; i < series.size(); ++i) {
    const double dx = std::log(static_cast<double>(i + 1)) - mx;
    sxy += dx * (std::log(series[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace mibo::metrics
