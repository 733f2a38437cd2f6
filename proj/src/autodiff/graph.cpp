#include "mibo/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>

#include "mibo/simd/kernels.hpp"

namespace mibo::autodiff {

std::string_view op_name(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::input: return "input";
    case OpKind::parameter: return "parameter";
    case OpKind::affine: return "affine";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::mul: return "mul";
    case OpKind::concat: return "concat";
    case OpKind::mse: return "mse";
    case OpKind::softmax_cross_entropy: return "softmax_cross_entropy";
  }
  return "unknown";
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

NodeId Graph::push(OpKind kind, std::vector<NodeId> args, std::string name) {
  for (NodeId a : args) {
    if (a >= nodes_.size()) {
      throw std::out_of_range("node " + std::to_string(a) + " referenced before it exists");
    }
  }
  Node n{kind, std::move(args), std::move(name), {}, 0, false, {}, {}};
  for (NodeId a : n.args) n.requires_grad = n.requires_grad || nodes_[a].requires_grad;
  nodes_.push_back(std::move(n));
  forward_done_ = false;
  return nodes_.size() - 1;
}

NodeId Graph::input(std::vector<std::size_t> shape, std::string name) {
  const NodeId id = push(OpKind::input, {}, std::move(name));
  nodes_[id].declared = std::move(shape);
  inputs_.push_back(id);
  return id;
}

ParamId Graph::parameter(Tensor init, std::string name) {
  const NodeId id = push(OpKind::parameter, {}, std::move(name));
  nodes_[id].declared = init.shape;
  nodes_[id].value = std::move(init);
  nodes_[id].requires_grad = true;
  params_.push_back(id);
  return {params_.size() - 1, id};
}

NodeId Graph::affine(NodeId x, NodeId weight, NodeId bias, std::string name) {
  return push(OpKind::affine, {x, weight, bias}, std::move(name));
}
NodeId Graph::relu(NodeId x, std::string name) { return push(OpKind::relu, {x}, std::move(name)); }
NodeId Graph::sigmoid(NodeId x, std::string name) {
  return push(OpKind::sigmoid, {x}, std::move(name));
}
NodeId Graph::mul(NodeId a, NodeId b, std::string name) {
  return push(OpKind::mul, {a, b}, std::move(name));
}
NodeId Graph::concat(NodeId a, NodeId b, std::size_t axis, std::string name) {
  if (axis > 1) throw std::invalid_argument("concat axis must be 0 or 1");
  const NodeId id = push(OpKind::concat, {a, b}, std::move(name));
  nodes_[id].axis = axis;
  return id;
}
NodeId Graph::mse(NodeId pred, NodeId target, std::string name) {
  return push(OpKind::mse, {pred, target}, std::move(name));
}
NodeId Graph::softmax_cross_entropy(NodeId logits, NodeId labels, std::string name) {
  return push(OpKind::softmax_cross_entropy, {logits, labels}, std::move(name));
}

std::string Graph::describe(NodeId id) const {
  const Node& n = nodes_[id];
  std::string out = "node #" + std::to_string(id) + " (" + std::string(op_name(n.kind));
  if (!n.name.empty()) out += " '" + n.name + "'";
  return out + ")";
}

const Tensor& Graph::forward(std::span<const Tensor> inputs) {
  if (nodes_.empty()) throw std::logic_error("forward on an empty graph");
  if (inputs.size() != inputs_.size()) {
    throw ShapeError("graph declares " + std::to_string(inputs_.size()) + " inputs, got " +
                     std::to_string(inputs.size()));
  }
  forward_done_ = false;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Node& n = nodes_[inputs_[k]];
    const Tensor& t = inputs[k];
    bool ok = t.shape.size() == n.declared.size();
    for (std::size_t d = 0; ok && d < t.shape.size(); ++d) {
      ok = n.declared[d] == 0 || n.declared[d] == t.shape[d];
    }
    if (!ok) {
      throw ShapeError(describe(inputs_[k]) + ": expected shape " + shape_string(n.declared) +
                       ", got " + shape_string(t.shape));
    }
    if (!t.all_finite()) throw std::domain_error(describe(inputs_[k]) + ": non-finite input");
    n.value = t;
  }
  for (NodeId p : params_) {
    if (!nodes_[p].value.all_finite()) {
      throw std::domain_error(describe(p) + ": non-finite parameter value");
    }
  }
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const OpKind k = nodes_[id].kind;
    if (k != OpKind::input && k != OpKind::parameter) evaluate(id);
  }
  last_inputs_.assign(inputs.begin(), inputs.end());
  forward_done_ = true;
  return nodes_.back().value;
}

void Graph::evaluate(NodeId id) {
  Node& n = nodes_[id];
  const auto& kern = simd::active();
  switch (n.kind) {
    case OpKind::affine: {
      const Tensor& x = nodes_[n.args[0]].value;
      const Tensor& w = nodes_[n.args[1]].value;
      const Tensor& b = nodes_[n.args[2]].value;
      if (w.shape.size() != 2) throw ShapeError(describe(id) + ": weight must be 2-D");
      const std::size_t out = w.shape[0];
      const std::size_t in = w.shape[1];
      if (x.cols() != in) {
        throw ShapeError(describe(id) + ": input width " + std::to_string(x.cols()) +
                         " does not match weight columns " + std::to_string(in));
      }
      if (b.size() != out) {
        throw ShapeError(describe(id) + ": bias length " + std::to_string(b.size()) +
                         " does not match " + std::to_string(out) + " outputs");
      }
      const std::size_t rows = x.rows();
      n.value.shape = {rows, out};
      n.value.data.resize(rows * out);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x.data.data() + r * in;
        double* yr = n.value.data.data() + r * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] = kern.dot(xr, w.data.data() + o * in, in) + b[o];
      }
      break;
    }
    case OpKind::relu: {
      const Tensor& x = nodes_[n.args[0]].value;
      n.value.shape = x.shape;
      n.value.data.resize(x.size());
      kern.relu(x.data.data(), n.value.data.data(), x.size());
      break;
    }
    case OpKind::sigmoid: {
      const Tensor& x = nodes_[n.args[0]].value;
      n.value.shape = x.shape;
      n.value.data.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) n.value[i] = stable_sigmoid(x[i]);
      break;
    }
    case OpKind::mul: {
      const Tensor& a = nodes_[n.args[0]].value;
      const Tensor& b = nodes_[n.args[1]].value;
      n.value.shape = a.shape;
      n.value.data.resize(a.size());
      if (a.shape == b.shape) {
        kern.mul(a.data.data(), b.data.data(), n.value.data.data(), a.size());
      } else if (b.size() == a.cols()) {
        const std::size_t c = a.cols();
        for (std::size_t r = 0; r < a.rows(); ++r) {
          kern.mul(a.data.data() + r * c, b.data.data(), n.value.data.data() + r * c, c);
        }
      } else {
        throw ShapeError(describe(id) + ": cannot multiply " + shape_string(a.shape) + " by " +
                         shape_string(b.shape));
      }
      break;
    }
    case OpKind::concat: {
      const Tensor& a = nodes_[n.args[0]].value;
      const Tensor& b = nodes_[n.args[1]].value;
      if (n.axis == 0) {
        if (a.cols() != b.cols()) {
          throw ShapeError(describe(id) + ": row concat of widths " + std::to_string(a.cols()) +
                           " and " + std::to_string(b.cols()));
        }
        n.value.data = a.data;
        n.value.data.insert(n.value.data.end(), b.data.begin(), b.data.end());
        if (a.shape.size() <= 1 && b.shape.size() <= 1) {
          n.value.shape = {n.value.data.size()};
        } else {
          n.value.shape = {a.rows() + b.rows(), a.cols()};
        }
      } else {
        if (a.rows() != b.rows()) {
          throw ShapeError(describe(id) + ": column concat of " + std::to_string(a.rows()) +
                           " and " + std::to_string(b.rows()) + " rows");
        }
        const std::size_t rows = a.rows();
        const std::size_t ca = a.cols();
        const std::size_t cb = b.cols();
        n.value.shape = {rows, ca + cb};
        n.value.data.resize(rows * (ca + cb));
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(a.data.begin() + r * ca, ca, n.value.data.begin() + r * (ca + cb));
          std::copy_n(b.data.begin() + r * cb, cb, n.value.data.begin() + r * (ca + cb) + ca);
        }
      }
      break;
    }
    case OpKind::mse: {
      const Tensor& p = nodes_[n.args[0]].value;
      const Tensor& t = nodes_[n.args[1]].value;
      if (p.size() != t.size() || p.cols() != t.cols()) {
        throw ShapeError(describe(id) + ": prediction " + shape_string(p.shape) +
                         " vs target " + shape_string(t.shape));
      }
      if (p.size() == 0) throw ShapeError(describe(id) + ": empty prediction");
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
      }
      n.value = Tensor::scalar(acc / static_cast<double>(p.size()));
      break;
    }
    case OpKind::softmax_cross_entropy: {
      const Tensor& z = nodes_[n.args[0]].value;
      const Tensor& labels = nodes_[n.args[1]].value;
      const std::size_t rows = z.rows();
      const std::size_t classes = z.cols();
      if (labels.size() != rows) {
        throw ShapeError(describe(id) + ": " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(rows) + " rows");
      }
      if (rows == 0) throw ShapeError(describe(id) + ": empty batch");
      double acc = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double lab = labels[r];
        if (lab < 0.0 || lab >= static_cast<double>(classes) || lab != std::floor(lab)) {
          throw ShapeError(describe(id) + ": label " + std::to_string(lab) + " outside [0, " +
                           std::to_string(classes) + ")");
        }
        const auto zr = z.row(r);
        const double m = *std::max_element(zr.begin(), zr.end());
        double s = 0.0;
        for (double v : zr) s += std::exp(v - m);
        acc += m + std::log(s) - zr[static_cast<std::size_t>(lab)];
      }
      n.value = Tensor::scalar(acc / static_cast<double>(rows));
      break;
    }
    case OpKind::input:
    case OpKind::parameter:
      break;
  }
}

std::vector<Tensor> Graph::backward(NodeId output) {
  if (!forward_done_) throw std::logic_error("backward called before forward");
  if (output >= nodes_.size()) throw std::out_of_range("backward: unknown output node");
  if (nodes_[output].value.size() != 1) {
    throw std::logic_error(describe(output) + ": backward needs a scalar output, got " +
                           shape_string(nodes_[output].value.shape));
  }
  for (NodeId id = 0; id <= output; ++id) {
    Node& n = nodes_[id];
    if (n.requires_grad) {
      n.grad.shape = n.value.shape;
      n.grad.data.assign(n.value.size(), 0.0);
    }
  }
  if (nodes_[output].requires_grad) nodes_[output].grad[0] = 1.0;
  for (NodeId id = output + 1; id-- > 0;) {
    if (nodes_[id].requires_grad) propagate(id);
  }
  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (NodeId p : params_) {
    if (p <= output) {
      grads.push_back(nodes_[p].grad);
    } else {
      grads.emplace_back(nodes_[p].value.shape, 0.0);
    }
  }
  return grads;
}

void Graph::propagate(NodeId id) {
  Node& n = nodes_[id];
  const auto& kern = simd::active();
  auto wants = [&](std::size_t k) { return nodes_[n.args[k]].requires_grad; };
  switch (n.kind) {
    case OpKind::affine: {
      const Tensor& x = nodes_[n.args[0]].value;
      const Tensor& w = nodes_[n.args[1]].value;
      const std::size_t out = w.shape[0];
      const std::size_t in = w.shape[1];
      const std::size_t rows = x.rows();
      Tensor* gx = wants(0) ? &nodes_[n.args[0]].grad : nullptr;
      Tensor* gw = wants(1) ? &nodes_[n.args[1]].grad : nullptr;
      Tensor* gb = wants(2) ? &nodes_[n.args[2]].grad : nullptr;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gy = n.grad.data.data() + r * out;
        const double* xr = x.data.data() + r * in;
        for (std::size_t o = 0; o < out; ++o) {
          const double g = gy[o];
          if (g == 0.0) continue;
          if (gx) kern.axpy(g, w.data.data() + o * in, gx->data.data() + r * in, in);
          if (gw) kern.axpy(g, xr, gw->data.data() + o * in, in);
          if (gb) (*gb)[o] += g;
        }
      }
      break;
    }
    case OpKind::relu: {
      const Tensor& x = nodes_[n.args[0]].value;
      kern.relu_backward(x.data.data(), n.grad.data.data(), nodes_[n.args[0]].grad.data.data(),
                         x.size());
      break;
    }
    case OpKind::sigmoid: {
      Tensor& gx = nodes_[n.args[0]].grad;
      for (std::size_t i = 0; i < n.value.size(); ++i) {
        const double y = n.value[i];
        gx[i] += n.grad[i] * y * (1.0 - y);
      }
      break;
    }
    case OpKind::mul: {
      const Tensor& a = nodes_[n.args[0]].value;
      const Tensor& b = nodes_[n.args[1]].value;
      const bool same = a.shape == b.shape;
      const std::size_t c = a.cols();
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t j = same ? i : i % c;
        if (wants(0)) nodes_[n.args[0]].grad[i] += n.grad[i] * b[j];
        if (wants(1)) nodes_[n.args[1]].grad[j] += n.grad[i] * a[i];
      }
      break;
    }
    case OpKind::concat: {
      const Tensor& a = nodes_[n.args[0]].value;
      const Tensor& b = nodes_[n.args[1]].value;
      if (n.axis == 0) {
        if (wants(0)) {
          for (std::size_t i = 0; i < a.size(); ++i) nodes_[n.args[0]].grad[i] += n.grad[i];
        }
        if (wants(1)) {
          for (std::size_t i = 0; i < b.size(); ++i) {
            nodes_[n.args[1]].grad[i] += n.grad[a.size() + i];
          }
        }
      } else {
        const std::size_t ca = a.cols();
        const std::size_t cb = b.cols();
        for (std::size_t r = 0; r < a.rows(); ++r) {
          const double* g = n.grad.data.data() + r * (ca + cb);
          if (wants(0)) {
            for (std::size_t k = 0; k < ca; ++k) nodes_[n.args[0]].grad[r * ca + k] += g[k];
          }
          if (wants(1)) {
            for (std::size_t k = 0; k < cb; ++k) nodes_[n.args[1]].grad[r * cb + k] += g[ca + k];
          }
        }
      }
      break;
    }
    case OpKind::mse: {
      const Tensor& p = nodes_[n.args[0]].value;
      const Tensor& t = nodes_[n.args[1]].value;
      const double scale = 2.0 * n.grad[0] / static_cast<double>(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        if (wants(0)) nodes_[n.args[0]].grad[i] += scale * d;
        if (wants(1)) nodes_[n.args[1]].grad[i] -= scale * d;
      }
      break;
    }
    case OpKind::softmax_cross_entropy: {
      const Tensor& z = nodes_[n.args[0]].value;
      const Tensor& labels = nodes_[n.args[1]].value;
      if (!wants(0)) break;
      Tensor& gz = nodes_[n.args[0]].grad;
      const std::size_t rows = z.rows();
      const std::size_t classes = z.cols();
      const double scale = n.grad[0] / static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto zr = z.row(r);
        const double m = *std::max_element(zr.begin(), zr.end());
        double s = 0.0;
        for (double v : zr) s += std::exp(v - m);
        const auto lab = static_cast<std::size_t>(labels[r]);
        for (std::size_t k = 0; k < classes; ++k) {
          const double prob = std::exp(zr[k] - m) / s;
          gz[r * classes + k] += scale * (prob - (k == lab ? 1.0 : 0.0));
        }
      }
      break;
    }
    case OpKind::input:
    case OpKind::parameter:
      break;
  }
}

}  // namespace mibo::autodiff
