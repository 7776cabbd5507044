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

// Pairwise correlation fits (second stage).

#pragma once

#include <span>
#include <string>
#include <vector>

#include "mvpcl/types.hpp"

namespace mvpcl {

struct PairFit {
  Index j = 0;
  Index k = 1;
  double rho = 0.0;
  double loglik = 0.0;
  bool converged = false;
  bool boundary = false;  // rho within boundary_tol of the +-(1 - rho_clamp) clamp
  int evaluations = 0;
};

/// Probability of the cell (y_j, y_k) given linear predictors a_j, a_k.
double pair_cell_prob(int y_j, int y_k, double a_j, double a_k, double rho);

/// Bivariate log-likelihood of one pair as a function of rho, with the
/// linear predictors held fixed. Observations are split once by
/// concordance so every evaluation is two batched CDF sweeps.
class PairLikelihood {
 public:
  PairLikelihood(std::span<const double> a_j, std::span<const double> a_k,
                 const BinaryVector& y_j, const BinaryVector& y_k);

  Index size() const noexcept { return static_cast<Index>(sign_.size()); }

  double loglik(double rho) const;

  /// d loglik / d rho and d2 loglik / d rho2.
  std::pair<double, double> score_curvature(double rho) const;

  /// Moment-based starting value, or 0 when a margin is degenerate.
  double start_value() const;

 private:
  // Signed arguments, grouped: concordant rows first.
  std::vector<double> h_;
  std::vector<double> k_;
  std::vector<int> sign_;
  std::size_t n_concordant_ = 0;
  double p11_ = 0.0;
  double p1_ = 0.0;
  double p2_ = 0.0;
};

double pair_loglik(double rho, std::span<const double> a_j, std::span<const double> a_k,
                   const BinaryVector& y_j, const BinaryVector& y_k);

double pair_loglik(double rho, const Matrix& x, const BinaryVector& y_j, const BinaryVector& y_k,
                   const Vector& beta_j, const Vector& beta_k);

/// Maximizes the pair log-likelihood over rho in [-(1 - c), 1 - c],
/// c = options.rho_clamp, working on the atanh scale.
PairFit fit_pair_rho(const PairLikelihood& likelihood, const SolverOptions& options = {},
                     const std::string& label = "pair");

PairFit fit_pair_rho(const Matrix& x, const BinaryVector& y_j, const BinaryVector& y_k,
                     const Vector& beta_j, const Vector& beta_k, const SolverOptions& options = {});

/// Derivatives of one observation's log pair probability ln P(y_j, y_k).
struct PairObsDerivatives {
  double prob;
  double score;        // d / d rho
  double curvature;    // d2 / d rho2
  double dscore_daj;   // d2 / d rho d a_j
  double dscore_dak;   // d2 / d rho d a_k
};

PairObsDerivatives pair_obs_derivatives(int y_j, int y_k, double a_j, double a_k, double rho);

}  // namespace mvpcl
