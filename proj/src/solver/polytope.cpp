#include "mibo/solver/polytope.hpp"

#include <algorithm>
#include <stdexcept>

#include "mibo/simd/kernels.hpp"

namespace mibo::solver {

double CuttingPlane::value(std::span<const double> w, std::span<const double> theta1) const {
  return simd::dot(a, w) + simd::dot(b, theta1) + c;
}

std::vector<double> Polytope::values(std::span<const double> w, std::span<const double> theta1) const {
  std::vector<double> v;
  v.reserve(planes_.size());
  for (const auto& p : planes_) v.push_back(p.value(w, theta1));
  return v;
}

double Polytope::lambda_sum() const noexcept {
  double s = 0.0;
  for (const auto& p : planes_) s += p.multiplier;
  return s;
}

double Polytope::weighted_sum(std::span<const double> values) const noexcept {
  double s = 0.0;
  for (std::size_t l = 0; l < planes_.size(); ++l) s += planes_[l].multiplier * values[l];
  return s;
}

void Polytope::accumulate_gradients(std::span<double> grad_w, std::span<double> grad_theta) const {
  for (const auto& p : planes_) {
    if (p.multiplier == 0.0) continue;
    simd::axpy(p.multiplier, p.a, grad_w);
    simd::axpy(p.multiplier, p.b, grad_theta);
  }
}

void Polytope::ascend(std::span<const double> values, double eta) {
  if (values.size() != planes_.size()) throw std::invalid_argument("ascend: one value per plane required");
  for (std::size_t l = 0; l < planes_.size(); ++l) {
    planes_[l].multiplier = std::max(0.0, planes_[l].multiplier + eta * values[l]);
  }
}

std::uint64_t Polytope::add_linearized(double J, std::span<const double> grad_w,
                                       std::span<const double> grad_theta,
                                       std::span<const double> w, std::span<const double> theta1,
                                       double eps) {
  if (grad_w.size() != w.size() || grad_theta.size() != theta1.size()) {
    throw std::invalid_argument("add_linearized: gradient and iterate sizes differ");
  }
  if ((w_dim_ && w.size() != w_dim_) || (theta_dim_ && theta1.size() != theta_dim_)) {
    throw std::invalid_argument("add_linearized: plane dimensions differ from the polytope's");
  }
  CuttingPlane p;
  p.id = next_id_++;
  p.a.assign(grad_w.begin(), grad_w.end());
  p.b.assign(grad_theta.begin(), grad_theta.end());
  p.c = J - simd::dot(grad_w, w) - simd::dot(grad_theta, theta1) - eps;
  planes_.push_back(std::move(p));
  return planes_.back().id;
}

PolytopeEvents Polytope::update(double J, std::span<const double> grad_w,
                                std::span<const double> grad_theta, std::span<const double> w,
                                std::span<const double> theta1, double eps, double tolerance,
                                std::size_t drop_after) {
  PolytopeEvents ev;
  for (auto& p : planes_) {
    p.inactive_count = p.multiplier < tolerance ? p.inactive_count + 1 : 0;
    if (p.inactive_count >= drop_after) ev.dropped.push_back(p.id);
  }
  std::erase_if(planes_, [&](const CuttingPlane& p) { return p.inactive_count >= drop_after; });
  if (J > eps) {
    ev.added = true;
    ev.added_id = add_linearized(J, grad_w, grad_theta, w, theta1, eps);
  }
  return ev;
}

}  // namespace mibo::solver
