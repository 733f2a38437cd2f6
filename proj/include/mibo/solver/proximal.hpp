#pragma once

#include <span>
#include <vector>

namespace mibo::solver {

// Squared distance from w to the nearest corner of {0,1}^d:
// sum_i min(w_i, 1 - w_i)^2. Rejects coordinates outside [0,1].
double regularizer_G(std::span<const double> w);

// Gradient of the regularizer away from w_i = 1/2: 2 (w_i - round(w_i)).
std::vector<double> regularizer_gradient(std::span<const double> w);

// argmin_x (1/(2 eta)) ||x - w||^2 + G(x), coordinatewise:
//   w_i <= 1/2:  (w_i/eta) / (1/eta + 2)
//   w_i >  1/2:  (w_i/eta + 2) / (1/eta + 2)
std::vector<double> prox(std::span<const double> w, double eta);

// lambda_p * sum_i (1 - w_i) w_i
double quadratic_penalty(std::span<const double> w, double lambda_p);

}  // namespace mibo::solver
