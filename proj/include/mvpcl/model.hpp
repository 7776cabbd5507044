// Copyright 2026 The mvpcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Model description: data, coefficient layout and sub-likelihood weights.

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mvpcl/types.hpp"

namespace mvpcl {

/// How components map onto coefficient vectors and design columns.
///
/// In the separate layout every component k owns a coefficient vector
/// beta_k over all columns of X, and stage-1 parameters are vec(B) in
/// column-major order. In the shared layout one coefficient vector is
/// common to all components, and component k reads its own list of design
/// columns (e.g. an age column that differs by component); stage 1 then
/// fits a single pooled probit over the stacked rows.
class CoefficientLayout {
 public:
  static CoefficientLayout separate(Index n_components, Index n_columns);
  static CoefficientLayout shared(std::vector<std::vector<Index>> component_columns);

  bool is_shared() const noexcept { return shared_; }
  Index n_components() const noexcept { return static_cast<Index>(columns_.size()); }
  Index coef_per_component() const noexcept { return columns_.empty() ? 0 : static_cast<Index>(columns_[0].size()); }
  Index n_groups() const noexcept { return shared_ ? 1 : n_components(); }
  Index n_theta1() const noexcept { return n_groups() * coef_per_component(); }

  Index group_of(Index k) const noexcept { return shared_ ? 0 : k; }
  Index offset_of_group(Index g) const noexcept { return g * coef_per_component(); }
  Index offset_of_component(Index k) const noexcept { return offset_of_group(group_of(k)); }
  std::vector<Index> components_in_group(Index g) const;
  const std::vector<Index>& columns(Index k) const { return columns_.at(k); }

 private:
  bool shared_ = false;
  std::vector<std::vector<Index>> columns_;
};

/// Composite-likelihood weights: one per component (stage 1) and one per
/// pair (stage 2). Empty vectors mean all ones.
struct ModelWeights {
  std::vector<double> component;
  std::vector<double> pair;
};

/// Number of unordered pairs among k components.
constexpr Index n_pairs_of(Index k) noexcept { return k * (k - 1) / 2; }

/// Position of pair (j, k), j < k, in lexicographic order.
Index pair_index(Index j, Index k, Index n_components);

/// Inverse of pair_index.
std::pair<Index, Index> pair_at(Index m, Index n_components);

class MvpModel {
 public:
  /// Separate coefficients for every component over all columns of x.
  MvpModel(Matrix x, BinaryMatrix y);
  MvpModel(Matrix x, BinaryMatrix y, CoefficientLayout layout);

  const Matrix& x() const noexcept { return x_; }
  const BinaryMatrix& y() const noexcept { return y_; }
  const CoefficientLayout& layout() const noexcept { return layout_; }

  Index n_obs() const noexcept { return x_.rows(); }
  Index n_components() const noexcept { return y_.cols(); }
  Index n_coef() const noexcept { return layout_.coef_per_component(); }
  Index n_pairs() const noexcept { return n_pairs_of(n_components()); }
  Index n_theta1() const noexcept { return layout_.n_theta1(); }
  Index n_params() const noexcept { return n_theta1() + n_pairs(); }

  /// N x P design of component k.
  Matrix component_design(Index k) const;

  /// x_i beta for component k.
  Vector linear_predictor(Index k, const Vector& beta) const;

  /// N x K matrix of linear predictors for stage-1 parameters theta1.
  Matrix linear_predictors(const Vector& theta1) const;

  /// Coefficient vector of component k inside theta1.
  Vector component_beta(const Vector& theta1, Index k) const;

  void set_weights(ModelWeights weights);
  double component_weight(Index k) const;
  double pair_weight(Index m) const;
  bool has_unit_weights() const;

  void set_names(std::vector<std::string> columns, std::vector<std::string> responses,
                 std::vector<std::string> coefficients = {});
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }
  const std::vector<std::string>& response_names() const noexcept { return response_names_; }
  const std::vector<std::string>& coefficient_names() const noexcept { return coefficient_names_; }

  /// Labels in parameter order: theta1 (groups in order), then rho (j, k)
  /// lexicographic.
  std::vector<std::string> parameter_names() const;

  /// Model on the given rows (with repetition), same layout, names, weights.
  MvpModel subset(std::span<const Index> rows) const;

 private:
  void validate() const;

  Matrix x_;
  BinaryMatrix y_;
  CoefficientLayout layout_;
  ModelWeights weights_;
  std::vector<std::string> column_names_;
  std::vector<std::string> response_names_;
  std::vector<std::string> coefficient_names_;
};

}  // namespace mvpcl
