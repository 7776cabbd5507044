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

// Nonparametric (case resampling) bootstrap of the two-stage estimates.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvpcl/estimator.hpp"

namespace mvpcl {

struct BootstrapOptions {
  Index replicates = 250;
  std::uint64_t seed = 0;
  SolverOptions solver;
  int threads = 0;
  // A run with a larger share of failed replicates is rejected.
  double max_failure_fraction = 0.2;
};

struct BootstrapFailure {
  Index replicate;
  std::string message;
};

struct BootstrapResult {
  Vector se;                                // per parameter, over successful replicates
  Matrix estimates;                         // successful replicates x parameters
  std::vector<Index> replicate_ids;         // replicate index of each estimates row
  std::vector<BootstrapFailure> failures;   // in replicate order
  Index requested = 0;
};

/// Replicate r resamples N rows with replacement using RngStream(seed, r)
/// and refits without the variance step, so results do not depend on the
/// thread count. Throws InputError when replicates < 2 and
/// EstimationError when too many replicates fail.
BootstrapResult bootstrap_se(const MvpModel& model, const BootstrapOptions& options);

/// Row indices drawn for replicate r.
std::vector<Index> bootstrap_rows(Index n_obs, std::uint64_t seed, Index replicate);

}  // namespace mvpcl
