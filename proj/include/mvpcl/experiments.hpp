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

// Simulation studies: Wald interval coverage and run-time scaling.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvpcl/types.hpp"

namespace mvpcl {

/// N x P design: an intercept, P - 2 standard normal columns and one
/// standardized Binomial(2, 0.3) column (P = 1: intercept only; P = 2:
/// intercept and the ternary column).
Matrix make_design(Index n_obs, Index n_coef, std::uint64_t seed);

/// P x K truth: intercepts -0.2, -0.4, ... by component, 0.5 on the first
/// non-intercept column, 0 elsewhere.
Matrix design_coefficients(Index n_coef, Index n_components);

/// Exchangeable correlation matrix.
Matrix exchangeable_correlation(Index n_components, double rho);

struct CoverageOptions {
  Index n_obs = 800;
  Index n_components = 3;
  Index n_coef = 4;
  Index reps = 500;
  double level = 0.95;
  double rho = 0.3;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct CoverageRow {
  std::string parameter;
  double truth = 0.0;
  double coverage = 0.0;  // percent of successful replicates
  double mean_estimate = 0.0;
  double mean_se = 0.0;
  double empirical_sd = 0.0;
};

struct CoverageResult {
  std::vector<CoverageRow> coefficients;
  std::vector<CoverageRow> correlations;
  Index requested = 0;
  Index succeeded = 0;
  Index failed = 0;
  double seconds = 0.0;
};

/// One fixed design per run; replicate r redraws the responses from
/// stream r + 1 and fits with the public estimator and variance.
CoverageResult run_coverage(const CoverageOptions& options);

struct TimingOptions {
  std::vector<Index> n_values{2000, 10000, 50000};
  std::vector<Index> k_values{4, 8};
  std::vector<Index> p_values{5, 9};
  Index reps = 10;
  std::uint64_t seed = 1;
  double rho = 0.3;
  int threads = 0;
};

struct TimingCell {
  Index n_obs = 0;
  Index n_components = 0;
  Index n_coef = 0;
  Index reps = 0;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
};

/// Mean wall-clock seconds of the two estimation stages per cell.
std::vector<TimingCell> run_timing(const TimingOptions& options);

}  // namespace mvpcl
