#pragma once

#include <span>

#include "mibo/autodiff/tensor.hpp"
#include "mibo/models/features.hpp"

namespace mibo::metrics {

// ||w - round(w)||_2 / max(||round(w)||_2, 1), ties at 0.5 rounding to 0.
double integer_feasibility_gap(std::span<const double> w);

double mean_squared_error(const autodiff::Tensor& predictions, const autodiff::Tensor& targets);

// Top-1 accuracy. Targets are either integer labels [B] or one-hot rows [B x C].
double accuracy(const autodiff::Tensor& predictions, const autodiff::Tensor& targets);

// MSE for the regression heads, accuracy for classification.
double task_metric(const autodiff::Tensor& predictions, const autodiff::Tensor& targets,
                   models::HeadKind head);

}  // namespace mibo::metrics
