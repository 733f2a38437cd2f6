#include "mibo/models/task_network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mibo::models {

using autodiff::Tensor;

std::vector<std::size_t> NetworkSpec::layer_sizes() const {
  std::vector<std::size_t> sizes{input_width()};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  return sizes;
}

std::size_t NetworkSpec::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) n += sizes[k + 1] * sizes[k] + sizes[k + 1];
  return n;
}

TaskNetwork::TaskNetwork(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.subcarriers == 0) throw std::invalid_argument("network needs at least one subcarrier");
  if (spec_.outputs == 0) throw std::invalid_argument("network needs at least one output");
  param_count_ = spec_.parameter_count();
  const auto sizes = spec_.layer_sizes();

  const auto x = graph_.input({0, spec_.input_width()}, "features");
  const auto target = spec_.head == HeadKind::classification
                          ? graph_.input({0}, "labels")
                          : graph_.input({0, spec_.outputs}, "targets");
  selection_param_ = graph_.parameter(Tensor({spec_.subcarriers, 1}, 0.5), "selection");
  auto mask = graph_.node(selection_param_);
  if (spec_.selection == SelectionSource::sigmoid) mask = graph_.sigmoid(mask, "selection_sigmoid");
  if (spec_.mode == csi::FeatureMode::stacked) mask = graph_.concat(mask, mask, 1, "selection_pairs");
  auto h = graph_.mul(x, mask, "masked_features");

  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const std::string tag = std::to_string(k + 1);
    const auto w = graph_.parameter(Tensor({sizes[k + 1], sizes[k]}), "W" + tag);
    const auto b = graph_.parameter(Tensor({sizes[k + 1]}), "b" + tag);
    layer_params_.push_back(w);
    layer_params_.push_back(b);
    h = graph_.affine(h, graph_.node(w), graph_.node(b), "layer" + tag);
    if (k + 2 < sizes.size()) h = graph_.relu(h, "relu" + tag);
  }
  output_node_ = h;
  loss_node_ = spec_.head == HeadKind::classification ? graph_.softmax_cross_entropy(h, target, "loss")
                                                      : graph_.mse(h, target, "loss");
}

TaskNetwork& TaskNetwork::operator=(const TaskNetwork& other) {
  if (this != &other) *this = TaskNetwork(other.spec_);
  return *this;
}

std::vector<double> TaskNetwork::init_parameters(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const auto sizes = spec_.layer_sizes();
  std::vector<double> theta;
  theta.reserve(param_count_);
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const double r = 1.0 / std::sqrt(static_cast<double>(sizes[k]));
    std::uniform_real_distribution<double> dist(-r, r);
    const std::size_t count = sizes[k + 1] * sizes[k] + sizes[k + 1];
    for (std::size_t i = 0; i < count; ++i) theta.push_back(dist(rng));
  }
  return theta;
}

void TaskNetwork::load(std::span<const double> theta, std::span<const double> selection) {
  if (theta.size() != param_count_) {
    throw std::invalid_argument("expected " + std::to_string(param_count_) + " parameters, got " +
                                std::to_string(theta.size()));
  }
  if (selection.size() != spec_.subcarriers) {
    throw std::invalid_argument("expected " + std::to_string(spec_.subcarriers) +
                                " selection weights, got " + std::to_string(selection.size()));
  }
  std::size_t offset = 0;
  for (const auto& pid : layer_params_) {
    Tensor& p = graph_.parameter(pid);
    std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(offset), p.size(), p.data.begin());
    offset += p.size();
  }
  auto& sel = graph_.parameter(selection_param_);
  std::copy(selection.begin(), selection.end(), sel.data.begin());
}

TaskNetwork::Evaluation TaskNetwork::evaluate(const Batch& batch, std::span<const double> theta,
                                              std::span<const double> selection,
                                              bool with_gradients) {
  if (batch.size() == 0) throw std::invalid_argument("task loss on an empty batch");
  load(theta, selection);
  const Tensor inputs[] = {batch.features, batch.targets};
  Evaluation out;
  out.loss = graph_.forward(inputs)[0];
  if (!with_gradients) return out;

  const auto grads = graph_.backward(loss_node_);
  out.grad_theta.reserve(param_count_);
  for (const auto& pid : layer_params_) {
    const auto& g = grads[pid.slot].data;
    out.grad_theta.insert(out.grad_theta.end(), g.begin(), g.end());
  }
  out.grad_selection = grads[selection_param_.slot].data;
  return out;
}

Tensor TaskNetwork::dummy_targets(std::size_t rows) const {
  return spec_.head == HeadKind::classification ? Tensor({rows}) : Tensor({rows, spec_.outputs});
}

Tensor TaskNetwork::predict(const Tensor& features, std::span<const double> theta,
                            std::span<const double> selection) {
  load(theta, selection);
  const Tensor inputs[] = {features, dummy_targets(features.rows())};
  graph_.forward(inputs);
  return graph_.value(output_node_);
}

double localization_loss(TaskNetwork& net, std::span<const double> theta1,
                         std::span<const double> selection, const Batch& batch) {
  return net.loss(batch, theta1, selection);
}

double sensing_loss(TaskNetwork& net, std::span<const double> theta2,
                    std::span<const double> selection, const Batch& batch) {
  return net.loss(batch, theta2, selection);
}

}  // namespace mibo::models
