#include "mibo/models/features.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mibo::models {

using autodiff::Tensor;

std::string to_string(HeadKind head) {
  switch (head) {
    case HeadKind::position: return "position";
    case HeadKind::classification: return "classification";
    case HeadKind::measurement: return "measurement";
  }
  return "unknown";
}

HeadKind head_from_string(const std::string& s) {
  if (s == "position") return HeadKind::position;
  if (s == "classification") return HeadKind::classification;
  if (s == "measurement") return HeadKind::measurement;
  throw std::invalid_argument("unknown head kind '" + s + "'");
}

std::vector<double> featurize(const csi::CsiMatrix& h, csi::FeatureMode mode) {
  std::vector<double> out;
  out.reserve(h.values.size() * csi::features_per_subcarrier(mode));
  for (const auto& v : h.values) {
    if (mode == csi::FeatureMode::stacked) {
      out.push_back(v.real());
      out.push_back(v.imag());
    } else {
      out.push_back(std::abs(v));
    }
  }
  return out;
}

TaskTable TaskTable::from_dataset(const csi::Dataset& ds) {
  TaskTable t;
  t.mode_ = ds.mode;
  t.subcarriers_ = ds.total_subcarriers();
  t.classes_ = ds.state_count();
  const std::size_t width = t.subcarriers_ * csi::features_per_subcarrier(ds.mode);
  t.features_ = Tensor({ds.size(), width});
  t.positions_ = Tensor({ds.size(), 2});
  t.states_.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    const auto row = featurize(s.h, ds.mode);
    std::copy(row.begin(), row.end(), t.features_.row(i).begin());
    t.positions_[2 * i] = s.position.x;
    t.positions_[2 * i + 1] = s.position.y;
    t.states_.push_back(s.state);
  }
  return t;
}

namespace {

void zscore_columns(Tensor& t, std::span<const std::size_t> fit_rows) {
  const std::size_t cols = t.cols();
  std::vector<double> mean(cols, 0.0);
  std::vector<double> var(cols, 0.0);
  for (std::size_t r : fit_rows) {
    for (std::size_t c = 0; c < cols; ++c) mean[c] += t[r * cols + c];
  }
  for (auto& m : mean) m /= static_cast<double>(fit_rows.size());
  for (std::size_t r : fit_rows) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = t[r * cols + c] - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(fit_rows.size()));
    const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
    for (std::size_t r = 0; r < t.rows(); ++r) t[r * cols + c] = (t[r * cols + c] - mean[c]) * scale;
  }
}

}  // namespace

void TaskTable::standardize(std::span<const std::size_t> fit_rows) {
  if (fit_rows.empty()) throw std::invalid_argument("standardize: no rows to fit");
  zscore_columns(features_, fit_rows);
  zscore_columns(positions_, fit_rows);
}

std::size_t TaskTable::outputs(HeadKind head) const noexcept {
  return head == HeadKind::position ? 2 : classes_;
}

Batch TaskTable::batch(std::span<const std::size_t> rows, HeadKind head) const {
  const std::size_t width = feature_width();
  Batch b;
  b.features = Tensor({rows.size(), width});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = features_.row(rows[k]);
    std::copy(src.begin(), src.end(), b.features.row(k).begin());
  }
  switch (head) {
    case HeadKind::position:
      b.targets = Tensor({rows.size(), 2});
      for (std::size_t k = 0; k < rows.size(); ++k) {
        b.targets[2 * k] = positions_[2 * rows[k]];
        b.targets[2 * k + 1] = positions_[2 * rows[k] + 1];
      }
      break;
    case HeadKind::classification:
      b.targets = Tensor({rows.size()});
      for (std::size_t k = 0; k < rows.size(); ++k) b.targets[k] = static_cast<double>(states_[rows[k]]);
      break;
    case HeadKind::measurement:
      b.targets = Tensor({rows.size(), classes_});
      for (std::size_t k = 0; k < rows.size(); ++k) b.targets[k * classes_ + states_[rows[k]]] = 1.0;
      break;
  }
  return b;
}

Batch TaskTable::all(HeadKind head) const {
  std::vector<std::size_t> rows(size());
  std::iota(rows.begin(), rows.end(), 0);
  return batch(rows, head);
}

}  // namespace mibo::models
