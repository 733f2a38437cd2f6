#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mibo::solver {

// Linear cut a . w + b . theta1 + c <= 0 with its Lagrange multiplier.
struct CuttingPlane {
  std::uint64_t id = 0;
  std::vector<double> a;  // over the selection vector
  std::vector<double> b;  // over the flattened localization parameters
  double c = 0.0;
  double multiplier = 0.0;
  std::size_t inactive_count = 0;  // consecutive updates with multiplier below tolerance

  double value(std::span<const double> w, std::span<const double> theta1) const;
};

struct PolytopeEvents {
  std::vector<std::uint64_t> dropped;
  bool added = false;
  std::uint64_t added_id = 0;
};

class Polytope {
 public:
  Polytope() = default;
  Polytope(std::size_t w_dim, std::size_t theta_dim) : w_dim_(w_dim), theta_dim_(theta_dim) {}

  std::size_t size() const noexcept { return planes_.size(); }
  bool empty() const noexcept { return planes_.empty(); }
  const std::vector<CuttingPlane>& planes() const noexcept { return planes_; }
  std::vector<CuttingPlane>& planes() noexcept { return planes_; }

  std::vector<double> values(std::span<const double> w, std::span<const double> theta1) const;
  double lambda_sum() const noexcept;
  double weighted_sum(std::span<const double> values) const noexcept;  // sum_l lambda_l * v_l

  // grad_w += sum_l lambda_l a_l, grad_theta += sum_l lambda_l b_l (planes in order).
  void accumulate_gradients(std::span<double> grad_w, std::span<double> grad_theta) const;

  // lambda_l <- max(0, lambda_l + eta * v_l)
  void ascend(std::span<const double> values, double eta);

  // Linearised cut J + grad_J . (x - x_t) <= eps written in a.w + b.theta + c <= 0
  // form; the new multiplier starts at 0.
  std::uint64_t add_linearized(double J, std::span<const double> grad_w,
                               std::span<const double> grad_theta, std::span<const double> w,
                               std::span<const double> theta1, double eps);

  // Drop step then add step: every plane whose multiplier has been below
  // `tolerance` for `drop_after` consecutive updates is removed; then, if
  // J > eps, the linearised cut at (w, theta1) is appended.
  PolytopeEvents update(double J, std::span<const double> grad_w, std::span<const double> grad_theta,
                        std::span<const double> w, std::span<const double> theta1, double eps,
                        double tolerance = 1e-8, std::size_t drop_after = 2);

 private:
  std::size_t w_dim_ = 0;
  std::size_t theta_dim_ = 0;
  std::uint64_t next_id_ = 1;
  std::vector<CuttingPlane> planes_;
};

}  // namespace mibo::solver
