#include <algorithm>
#include <cmath>

#include "mibo/autodiff/graph.hpp"

namespace mibo::autodiff {

double finite_difference_check(Graph& graph, double perturbation) {
  if (!(perturbation > 0.0)) throw std::invalid_argument("perturbation must be positive");
  if (!graph.has_forward()) throw std::logic_error("finite_difference_check needs a prior forward");
  const std::vector<Tensor> inputs = graph.last_inputs();
  const std::vector<Tensor> analytic = graph.backward();

  double worst = 0.0;
  for (std::size_t slot = 0; slot < graph.parameter_count(); ++slot) {
    Tensor& p = graph.parameter(graph.parameter_id(slot));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + perturbation;
      const double up = graph.forward(inputs)[0];
      p[i] = saved - perturbation;
      const double down = graph.forward(inputs)[0];
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * perturbation);
      const double a = analytic[slot][i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(std::abs(a), 1e-8));
    }
  }
  graph.forward(inputs);
  return worst;
}

}  // namespace mibo::autodiff
