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

// Two-step sandwich covariance for the stage-1 and stage-2 estimates.
//
// With n1 stage-1 and m stage-2 parameters, per-observation scores S1
// (N x n1) and S2 (N x m), and means over observations:
//
//   H1 = -mean d2 l1 / d theta1^2        v1 = H1^-1
//   H2 = -mean d s2 / d theta2           v2 = H2^-1 (diagonal: pairs are separate)
//   J1 = mean S1 S1^T                    J2 = mean S2 S2^T
//   C  = -mean d s2 / d theta1           R  = mean S2 S1^T
//
//   cov(theta1)         = v1 J1 v1 = W1
//   cov(theta1, theta2) = v1 R^T v2 - W1 C^T v2
//   cov(theta2)         = v2 J2 v2 + v2 (C W1 C^T - R v1 C^T - C v1 R^T) v2
//
// all divided by N. Shared coefficients cluster stage-1 scores by
// original observation, so N is always the number of data rows.

#pragma once

#include "mvpcl/estimator.hpp"

namespace mvpcl {

struct ObsScores {
  Matrix stage1;  // N x n1
  Matrix stage2;  // N x m
};

/// Scores of every observation at the parameters stored in `fit`.
ObsScores per_obs_scores(const FitResult& fit, const MvpModel& model, int threads = 0);

struct SandwichBlocks {
  Matrix v1;       // inverse stage-1 information
  Matrix v1_star;  // stage-1 outer product of scores (J1)
  Matrix v2;       // inverse stage-2 information
  Matrix v2_star;  // stage-2 outer product of scores (J2)
  Matrix c_star;   // m x n1 cross information
  Matrix r;        // m x n1 cross outer product
  Index n_obs = 0;
};

SandwichBlocks assemble_blocks(const ObsScores& scores, const FitResult& fit,
                               const MvpModel& model, int threads = 0);

/// Full (n1 + m) square covariance, already divided by N.
Matrix robust_cov(const SandwichBlocks& blocks);

/// per_obs_scores, assemble_blocks and robust_cov in sequence.
Matrix robust_covariance(const FitResult& fit, const MvpModel& model, int threads = 0);

}  // namespace mvpcl
