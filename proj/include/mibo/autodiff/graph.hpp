#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mibo/autodiff/tensor.hpp"

namespace mibo::autodiff {

using NodeId = std::size_t;

struct ParamId {
  std::size_t slot = 0;
  NodeId node = 0;
};

enum class OpKind {
  input,
  parameter,
  affine,
  relu,
  sigmoid,
  mul,
  concat,
  mse,
  softmax_cross_entropy,
};

std::string_view op_name(OpKind kind) noexcept;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reverse-mode differentiation record. Nodes are appended in construction
// order, so every node's inputs precede it and one reverse sweep is a valid
// backward pass. The graph owns parameter storage; callers load values through
// parameter() between forward passes.
class Graph {
 public:
  // A zero in `shape` matches any extent (used for the batch dimension).
  NodeId input(std::vector<std::size_t> shape, std::string name = {});
  ParamId parameter(Tensor init, std::string name = {});

  // x[R x in] * W^T + b with W[out x in] and b[out]; the bias is the only
  // broadcast the op set supports besides mul's row-vector operand.
  NodeId affine(NodeId x, NodeId weight, NodeId bias, std::string name = {});
  NodeId relu(NodeId x, std::string name = {});
  NodeId sigmoid(NodeId x, std::string name = {});
  // Elementwise product. `b` is either the same shape as `a`, or holds exactly
  // one row's worth of values and is applied to every row of `a`.
  NodeId mul(NodeId a, NodeId b, std::string name = {});
  // axis 0 stacks rows; axis 1 joins columns row by row (2-D operands only).
  NodeId concat(NodeId a, NodeId b, std::size_t axis, std::string name = {});
  // Mean over every element of (pred - target)^2.
  NodeId mse(NodeId pred, NodeId target, std::string name = {});
  // Mean negative log-likelihood; `labels` holds one class index per row.
  NodeId softmax_cross_entropy(NodeId logits, NodeId labels, std::string name = {});

  NodeId node(ParamId p) const noexcept { return p.node; }
  Tensor& parameter(ParamId p) { return nodes_[p.node].value; }
  const Tensor& parameter(ParamId p) const { return nodes_[p.node].value; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  ParamId parameter_id(std::size_t slot) const { return {slot, params_.at(slot)}; }

  std::size_t size() const noexcept { return nodes_.size(); }
  OpKind kind(NodeId id) const { return nodes_.at(id).kind; }
  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }

  // Runs every node in order. Inputs are matched to input() nodes in
  // declaration order. Returns the value of the last node.
  const Tensor& forward(std::span<const Tensor> inputs);

  // Gradients of the scalar `output` with respect to every parameter, indexed
  // by ParamId::slot. Requires a forward pass over the current structure.
  std::vector<Tensor> backward(NodeId output);
  std::vector<Tensor> backward() { return backward(nodes_.size() - 1); }

  bool has_forward() const noexcept { return forward_done_; }
  const std::vector<Tensor>& last_inputs() const noexcept { return last_inputs_; }

 private:
  struct Node {
    OpKind kind;
    std::vector<NodeId> args;
    std::string name;
    std::vector<std::size_t> declared;  // input/parameter shapes
    std::size_t axis = 0;
    bool requires_grad = false;
    Tensor value;
    Tensor grad;
  };

  NodeId push(OpKind kind, std::vector<NodeId> args, std::string name);
  std::string describe(NodeId id) const;
  void evaluate(NodeId id);
  void propagate(NodeId id);

  std::vector<Node> nodes_;
  std::vector<NodeId> inputs_;
  std::vector<NodeId> params_;
  std::vector<Tensor> last_inputs_;
  bool forward_done_ = false;
};

// Central-difference check of every parameter gradient of the graph's last
// (scalar) node, at the inputs of the most recent forward pass. Returns
// max |analytic - numeric| / max(|analytic|, 1e-8). Parameters are restored.
double finite_difference_check(Graph& graph, double perturbation);

}  // namespace mibo::autodiff
