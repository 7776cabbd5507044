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

// Two-stage composite-likelihood fit of a multivariate probit model.

#pragma once

#include <vector>

#include "mvpcl/model.hpp"
#include "mvpcl/stage1.hpp"
#include "mvpcl/stage2.hpp"
#include "mvpcl/types.hpp"

namespace mvpcl {

struct StageTimings {
  double stage1 = 0.0;
  double stage2 = 0.0;
  double variance = 0.0;
};

struct FitResult {
  // Parameter order throughout: theta1 (one coefficient block per group;
  // per component in the separate layout, a single block when shared),
  // then one correlation per pair in lexicographic (j, k) order.
  Vector theta1;
  Matrix coefficients;  // P x K; column k is the coefficient vector of component k
  Matrix correlation;   // K x K, unit diagonal, not forced positive definite

  std::vector<UnivariateFit> stage1;  // one per coefficient group
  std::vector<PairFit> stage2;        // one per pair

  double stage1_loglik = 0.0;  // weighted totals
  double stage2_loglik = 0.0;
  double min_eigenvalue = 1.0;  // of the correlation estimate

  Matrix robust_cov;  // empty unless the variance was requested
  StageTimings timings;

  Vector theta() const;
  Vector rho() const;
  Vector robust_se() const;
};

struct FitOptions {
  SolverOptions solver;
  int threads = 0;  // 0: all hardware threads
  bool compute_variance = true;
};

FitResult fit(const MvpModel& model, const FitOptions& options = {});

struct CompositeLoglik {
  double stage1_total = 0.0;
  double stage2_total = 0.0;
};

/// Weighted univariate and pairwise log-likelihood totals at the given
/// parameters. Only the off-diagonal of `correlation` is used.
CompositeLoglik composite_loglik(const Vector& theta1, const Matrix& correlation,
                                 const MvpModel& model);

/// Stage-1 design and response of one coefficient group: the component's
/// own rows, or every component's rows stacked when coefficients are shared.
struct GroupData {
  Matrix x;
  BinaryVector y;
  std::vector<double> weights;  // empty when all are one
  std::vector<Index> components;
};

GroupData group_data(const MvpModel& model, Index group);

/// Symmetric positive definite inverse via eigendecomposition. Throws
/// NumericError naming `block` when not positive definite or when the
/// condition number exceeds 1e12.
Matrix inverse_spd(const Matrix& a, const std::string& block);

/// Nearest correlation matrix (alternating projections with Dykstra's
/// correction) with eigenvalues floored at `min_eigenvalue`. For simulating
/// from a pairwise estimate that is not positive definite.
Matrix nearest_correlation(const Matrix& correlation, double min_eigenvalue = 1e-6);

}  // namespace mvpcl
