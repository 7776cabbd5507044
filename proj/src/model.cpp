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

#include "mvpcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mvpcl {

CoefficientLayout CoefficientLayout::separate(Index n_components, Index n_columns) {
  CoefficientLayout layout;
  std::vector<Index> all(static_cast<std::size_t>(n_columns));
  std::iota(all.begin(), all.end(), Index{0});
  layout.columns_.assign(static_cast<std::size_t>(n_components), all);
  return layout;
}

CoefficientLayout CoefficientLayout::shared(std::vector<std::vector<Index>> component_columns) {
  if (component_columns.empty()) {
    throw InputError("shared coefficient layout needs at least one component");
  }
  const std::size_t width = component_columns.front().size();
  if (width == 0) {
    throw InputError("shared coefficient layout has no coefficients");
  }
  for (std::size_t k = 0; k < component_columns.size(); ++k) {
    if (component_columns[k].size() != width) {
      throw InputError("shared coefficient layout: component " + std::to_string(k) + " maps " +
                       std::to_string(component_columns[k].size()) + " columns, expected " +
                       std::to_string(width));
    }
  }
  CoefficientLayout layout;
  layout.shared_ = true;
  layout.columns_ = std::move(component_columns);
  return layout;
}

std::vector<Index> CoefficientLayout::components_in_group(Index g) const {
  if (shared_) {
    std::vector<Index> all(static_cast<std::size_t>(n_components()));
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  return {g};
}

Index pair_index(Index j, Index k, Index n_components) {
  if (!(0 <= j && j < k && k < n_components)) {
    throw InputError("pair_index: need 0 <= j < k < K");
  }
  // Pairs before row j: (K-1) + (K-2) + ... + (K-j).
  return j * (2 * n_components - j - 1) / 2 + (k - j - 1);
}

std::pair<Index, Index> pair_at(Index m, Index n_components) {
  Index j = 0;
  Index row = n_components - 1;
  while (m >= row) {
    m -= row;
    ++j;
    --row;
  }
  return {j, j + 1 + m};
}

MvpModel::MvpModel(Matrix x, BinaryMatrix y)
    : MvpModel(std::move(x), y, CoefficientLayout::separate(y.cols(), 0)) {
  layout_ = CoefficientLayout::separate(y_.cols(), x_.cols());
  validate();
}

MvpModel::MvpModel(Matrix x, BinaryMatrix y, CoefficientLayout layout)
    : x_(std::move(x)), y_(std::move(y)), layout_(std::move(layout)) {
  validate();
}

void MvpModel::validate() const {
  if (x_.rows() != y_.rows()) {
    throw InputError("design has " + std::to_string(x_.rows()) + " rows but responses have " +
                     std::to_string(y_.rows()));
  }
  if (y_.cols() < 1) {
    throw InputError("at least one response component is required");
  }
  if (layout_.n_components() != y_.cols()) {
    throw InputError("coefficient layout covers " + std::to_string(layout_.n_components()) +
                     " components but there are " + std::to_string(y_.cols()) + " responses");
  }
  for (Index k = 0; k < layout_.n_components(); ++k) {
    for (Index c : layout_.columns(k)) {
      if (c < 0 || c >= x_.cols()) {
        throw InputError("coefficient layout references column " + std::to_string(c) +
                         " outside the design");
      }
    }
  }
  for (Index j = 0; j < y_.cols(); ++j) {
    for (Index i = 0; i < y_.rows(); ++i) {
      if (y_(i, j) > 1) {
        throw InputError("response entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is not 0 or 1");
      }
    }
  }
  if (!x_.allFinite()) {
    throw InputError("design contains non-finite values");
  }
}

Matrix MvpModel::component_design(Index k) const { return x_(Eigen::all, layout_.columns(k)); }

Vector MvpModel::linear_predictor(Index k, const Vector& beta) const {
  return x_(Eigen::all, layout_.columns(k)) * beta;
}

Matrix MvpModel::linear_predictors(const Vector& theta1) const {
  Matrix a(n_obs(), n_components());
  for (Index k = 0; k < n_components(); ++k) {
    a.col(k) = linear_predictor(k, component_beta(theta1, k));
  }
  return a;
}

Vector MvpModel::component_beta(const Vector& theta1, Index k) const {
  return theta1.segment(layout_.offset_of_component(k), n_coef());
}

void MvpModel::set_weights(ModelWeights weights) {
  auto check = [](const std::vector<double>& w, Index expected, const char* what) {
    if (!w.empty() && static_cast<Index>(w.size()) != expected) {
      throw InputError(std::string(what) + " weights: expected " + std::to_string(expected) +
                       " entries, got " + std::to_string(w.size()));
    }
    for (double v : w) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InputError(std::string(what) + " weights must be positive and finite");
      }
    }
  };
  check(weights.component, n_components(), "component");
  check(weights.pair, n_pairs(), "pair");
  weights_ = std::move(weights);
}

double MvpModel::component_weight(Index k) const {
  return weights_.component.empty() ? 1.0 : weights_.component[static_cast<std::size_t>(k)];
}

double MvpModel::pair_weight(Index m) const {
  return weights_.pair.empty() ? 1.0 : weights_.pair[static_cast<std::size_t>(m)];
}

bool MvpModel::has_unit_weights() const {
  auto ones = [](const std::vector<double>& w) {
    return std::all_of(w.begin(), w.end(), [](double v) { return v == 1.0; });
  };
  return ones(weights_.component) && ones(weights_.pair);
}

void MvpModel::set_names(std::vector<std::string> columns, std::vector<std::string> responses,
                         std::vector<std::string> coefficients) {
  if (!columns.empty() && static_cast<Index>(columns.size()) != x_.cols()) {
    throw InputError("column names do not match the design width");
  }
  if (!responses.empty() && static_cast<Index>(responses.size()) != y_.cols()) {
    throw InputError("response names do not match the number of components");
  }
  if (!coefficients.empty() && static_cast<Index>(coefficients.size()) != n_coef()) {
    throw InputError("coefficient names do not match the layout width");
  }
  column_names_ = std::move(columns);
  response_names_ = std::move(responses);
  coefficient_names_ = std::move(coefficients);
}

std::vector<std::string> MvpModel::parameter_names() const {
  auto response = [&](Index k) {
    return response_names_.empty() ? "y" + std::to_string(k + 1)
                                   : response_names_[static_cast<std::size_t>(k)];
  };
  auto coefficient = [&](Index k, Index p) {
    if (!coefficient_names_.empty()) {
      return coefficient_names_[static_cast<std::size_t>(p)];
    }
    const Index col = layout_.columns(k)[static_cast<std::size_t>(p)];
    return column_names_.empty() ? "x" + std::to_string(col)
                                 : column_names_[static_cast<std::size_t>(col)];
  };

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n_params()));
  for (Index g = 0; g < layout_.n_groups(); ++g) {
    const Index k = layout_.components_in_group(g).front();
    for (Index p = 0; p < n_coef(); ++p) {
      names.push_back(layout_.is_shared() ? "beta[" + coefficient(k, p) + "]"
                                          : "beta[" + coefficient(k, p) + "," + response(k) + "]");
    }
  }
  for (Index m = 0; m < n_pairs(); ++m) {
    const auto [j, k] = pair_at(m, n_components());
    names.push_back("rho[" + response(j) + "," + response(k) + "]");
  }
  return names;
}

MvpModel MvpModel::subset(std::span<const Index> rows) const {
  std::vector<Index> idx(rows.begin(), rows.end());
  MvpModel out(x_(idx, Eigen::all), y_(idx, Eigen::all), layout_);
  out.weights_ = weights_;
  out.column_names_ = column_names_;
  out.response_names_ = response_names_;
  out.coefficient_names_ = coefficient_names_;
  return out;
}

}  // namespace mvpcl
