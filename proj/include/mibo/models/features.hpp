#pragma once

#include <span>
#include <vector>

#include "mibo/autodiff/tensor.hpp"
#include "mibo/csi/dataset.hpp"

namespace mibo::models {

enum class HeadKind {
  position,        // 2-D regression, MSE
  classification,  // softmax cross-entropy over states
  measurement,     // one-hot state vector regressed with MSE
};

std::string to_string(HeadKind head);
HeadKind head_from_string(const std::string& s);

struct Batch {
  autodiff::Tensor features;  // [B x F]
  autodiff::Tensor targets;   // [B x 2], [B] labels, or [B x C]
  std::size_t size() const noexcept { return features.rows(); }
};

// Model-ready view of a dataset: one feature row per sample plus targets.
// Features and positions are z-scored with statistics from the rows passed
// to standardize(); until then they are raw.
class TaskTable {
 public:
  static TaskTable from_dataset(const csi::Dataset& ds);

  void standardize(std::span<const std::size_t> fit_rows);

  Batch batch(std::span<const std::size_t> rows, HeadKind head) const;
  Batch all(HeadKind head) const;

  std::size_t size() const noexcept { return states_.size(); }
  std::size_t feature_width() const noexcept { return features_.cols(); }
  std::size_t subcarriers() const noexcept { return subcarriers_; }
  std::size_t classes() const noexcept { return classes_; }
  csi::FeatureMode mode() const noexcept { return mode_; }
  std::size_t outputs(HeadKind head) const noexcept;

  const autodiff::Tensor& features() const noexcept { return features_; }
  std::span<const std::size_t> states() const noexcept { return states_; }

 private:
  autodiff::Tensor features_;
  autodiff::Tensor positions_;
  std::vector<std::size_t> states_;
  std::size_t subcarriers_ = 0;
  std::size_t classes_ = 0;
  csi::FeatureMode mode_ = csi::FeatureMode::stacked;
};

std::vector<double> featurize(const csi::CsiMatrix& h, csi::FeatureMode mode);

}  // namespace mibo::models
