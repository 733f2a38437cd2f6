#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mibo/autodiff/graph.hpp"
#include "mibo/csi/dataset.hpp"
#include "mibo/models/features.hpp"

namespace mibo::models {

// Where the selection weights come from: the relaxed vector itself, or
// sigmoid(raw) for the penalty-trained baselines.
enum class SelectionSource { direct, sigmoid };

struct NetworkSpec {
  std::size_t subcarriers = 64;
  csi::FeatureMode mode = csi::FeatureMode::stacked;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t outputs = 2;
  HeadKind head = HeadKind::position;
  SelectionSource selection = SelectionSource::direct;

  std::size_t input_width() const noexcept {
    return subcarriers * csi::features_per_subcarrier(mode);
  }
  // [input, hidden..., outputs]
  std::vector<std::size_t> layer_sizes() const;
  std::size_t parameter_count() const;
};

// A perceptron task model behind the shared selection mask. Parameters live
// outside the network as a flat block laid out [W1, b1, W2, b2, ...] with
// W_k row-major [out x in]; each call loads them into the internal graph.
class TaskNetwork {
 public:
  explicit TaskNetwork(NetworkSpec spec);

  TaskNetwork(const TaskNetwork& other) : TaskNetwork(other.spec_) {}
  TaskNetwork& operator=(const TaskNetwork& other);
  TaskNetwork(TaskNetwork&&) noexcept = default;
  TaskNetwork& operator=(TaskNetwork&&) noexcept = default;

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t parameter_count() const noexcept { return param_count_; }

  // uniform(-r, r) with r = 1/sqrt(fan_in), layer by layer.
  std::vector<double> init_parameters(std::uint64_t seed) const;

  struct Evaluation {
    double loss = 0.0;
    std::vector<double> grad_theta;
    std::vector<double> grad_selection;
  };

  Evaluation evaluate(const Batch& batch, std::span<const double> theta,
                      std::span<const double> selection, bool with_gradients);

  double loss(const Batch& batch, std::span<const double> theta, std::span<const double> selection) {
    return evaluate(batch, theta, selection, false).loss;
  }

  // Raw head outputs [B x outputs].
  autodiff::Tensor predict(const autodiff::Tensor& features, std::span<const double> theta,
                           std::span<const double> selection);

  autodiff::Graph& graph() noexcept { return graph_; }
  // Copies theta and selection into the graph's parameter storage.
  void load(std::span<const double> theta, std::span<const double> selection);

 private:
  autodiff::Tensor dummy_targets(std::size_t rows) const;

  NetworkSpec spec_;
  std::size_t param_count_ = 0;
  autodiff::Graph graph_;
  std::vector<autodiff::ParamId> layer_params_;  // W1, b1, W2, b2, ...
  autodiff::ParamId selection_param_{};
  autodiff::NodeId output_node_ = 0;
  autodiff::NodeId loss_node_ = 0;
};

double localization_loss(TaskNetwork& net, std::span<const double> theta1,
                         std::span<const double> selection, const Batch& batch);
double sensing_loss(TaskNetwork& net, std::span<const double> theta2,
                    std::span<const double> selection, const Batch& batch);

}  // namespace mibo::models
