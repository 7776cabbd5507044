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

// Univariate probit regressions (first stage).

#pragma once

#include <span>
#include <string>

#include "mvpcl/types.hpp"

namespace mvpcl {

struct UnivariateFit {
  Vector beta;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  Matrix score_per_obs;  // rows x P, gradient contribution of each row
  Matrix neg_hessian;    // P x P, mean over rows
};

/// Optional per-row weights; an empty span means all ones.
using RowWeights = std::span<const double>;

/// Sum over rows of w_i ln Phi(q_i x_i beta), q_i = 2 y_i - 1, with
/// probabilities clamped at 1e-300.
double uni_probit_loglik(const Vector& beta, const Matrix& x, const BinaryVector& y,
                         RowWeights weights = {});

struct ScoreHessian {
  Matrix score_per_obs;
  Matrix neg_hessian_mean;
};

/// Analytic per-row gradients and mean negative Hessian at beta.
ScoreHessian uni_score_hessian(const Vector& beta, const Matrix& x, const BinaryVector& y,
                               RowWeights weights = {});

/// Newton-Raphson with step halving on internally standardized columns,
/// starting from `start` (empty: beta = 0). `label` names the component in
/// error messages.
///
/// Throws EstimationError for a single-class response, a rank-deficient
/// design or non-convergence, and SeparationError when coefficients
/// diverge.
UnivariateFit fit_uni_probit(const Matrix& x, const BinaryVector& y,
                             const SolverOptions& options = {}, RowWeights weights = {},
                             const std::string& label = "y", const Vector& start = {});

}  // namespace mvpcl
