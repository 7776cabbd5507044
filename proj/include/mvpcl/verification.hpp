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

// Reference machinery for checking the two-stage estimator: a data
// simulator, multivariate normal rectangle probabilities, the full
// likelihood, and a direct full-likelihood maximizer for tiny problems.

#pragma once

#include <cstdint>
#include <span>

#include "mvpcl/model.hpp"
#include "mvpcl/types.hpp"

namespace mvpcl {

struct SimSpec {
  Matrix coefficients;  // P x K
  Matrix correlation;   // K x K, positive definite, unit diagonal
  Matrix x;             // N x P
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// y_ik = 1 iff z_ik <= x_i beta_k with z_i ~ N(0, correlation). Throws
/// InputError when the correlation matrix is not a positive definite
/// correlation matrix (minimum eigenvalue above 1e-8).
BinaryMatrix simulate_y(const SimSpec& spec);

/// Same, from an N x K matrix of linear predictors.
BinaryMatrix simulate_y(const Matrix& predictors, const Matrix& correlation, std::uint64_t seed,
                        std::uint64_t stream = 0);

struct Interval {
  double lower;
  double upper;
};

struct RectOptions {
  // Stop once three standard errors over the random shifts fall below half this.
  double abs_tol = 1e-6;
  std::uint64_t seed = 0x6d76706eULL;
  Index shifts = 12;
  Index min_points = 1 << 9;   // lattice points per shift
  Index max_points = 1 << 17;
  bool fixed_points = false;   // use min_points only; smooth in the limits
  bool force_qmc = false;      // use the lattice rule even for K <= 2
};

struct RectProb {
  double value = 0.0;
  double error = 0.0;  // three standard errors for the lattice rule
  Index points = 0;
};

/// P(lower <= Z <= upper) for Z ~ N(0, sigma), K <= 6. K = 1 and 2 are
/// closed form; K >= 3 uses a randomly shifted rank-1 lattice rule over
/// the sequentially conditioned (separation of variables) integrand.
RectProb mvn_rect_prob(std::span<const Interval> limits, const Matrix& sigma,
                       const RectOptions& options = {});

struct FullLoglik {
  double value = 0.0;
  double error = 0.0;  // propagated from the rectangle error estimates
};

/// Full log-likelihood sum_i ln P(y_i | x_i) for K <= 6. Identical rows
/// share one rectangle evaluation.
FullLoglik full_loglik(const Vector& theta1, const Matrix& correlation, const MvpModel& model,
                       const RectOptions& options = {}, int threads = 0);

struct FullMleOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-7;  // on the per-observation mean log-likelihood
  double diff_step = 1e-5;
  int threads = 0;
};

struct FullMleResult {
  Vector theta1;
  Matrix correlation;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton (BFGS, central-difference gradients) maximization of the
/// full likelihood over theta1 and atanh(rho), from zero. Restricted to
/// K <= 3, P <= 2 and N <= 2000.
FullMleResult full_mle_tiny(const MvpModel& model, const FullMleOptions& options = {});

}  // namespace mvpcl
