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

#include "mvpcl/bootstrap.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "mvpcl/parallel.hpp"
#include "mvpcl/rng.hpp"

namespace mvpcl {

std::vector<Index> bootstrap_rows(Index n_obs, std::uint64_t seed, Index replicate) {
  RngStream rng(seed, static_cast<std::uint64_t>(replicate));
  std::vector<Index> rows(static_cast<std::size_t>(n_obs));
  for (auto& r : rows) {
    r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_obs)));
  }
  return rows;
}

BootstrapResult bootstrap_se(const MvpModel& model, const BootstrapOptions& options) {
  if (options.replicates < 2) {
    throw InputError("bootstrap needs at least 2 replicates, got " +
                     std::to_string(options.replicates));
  }
  const auto reps = static_cast<std::size_t>(options.replicates);
  std::vector<std::optional<Vector>> theta(reps);
  std::vector<std::string> errors(reps);

  FitOptions fit_options;
  fit_options.solver = options.solver;
  fit_options.threads = 1;
  fit_options.compute_variance = false;

  parallel_for(options.replicates, options.threads, [&](std::ptrdiff_t r) {
    const auto idx = static_cast<std::size_t>(r);
    const std::vector<Index> rows = bootstrap_rows(model.n_obs(), options.seed, r);
    try {
      theta[idx] = fit(model.subset(rows), fit_options).theta();
    } catch (const EstimationError& e) {
      errors[idx] = e.what();
    } catch (const NumericError& e) {
      errors[idx] = e.what();
    }
  });

  BootstrapResult out;
  out.requested = options.replicates;
  Index ok = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (theta[r]) {
      ++ok;
    } else {
      out.failures.push_back({static_cast<Index>(r), errors[r]});
    }
  }
  const double failed_share = static_cast<double>(out.failures.size()) / static_cast<double>(reps);
  if (failed_share > options.max_failure_fraction || ok < 2) {
    std::ostringstream msg;
    msg << out.failures.size() << " of " << reps << " replicates failed";
    if (!out.failures.empty()) {
      msg << " (first: " << out.failures.front().message << ")";
    }
    throw EstimationError("bootstrap", "replicates", msg.str());
  }

  out.estimates.resize(ok, model.n_params());
  Index row = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (theta[r]) {
      out.estimates.row(row++) = theta[r]->transpose();
      out.replicate_ids.push_back(static_cast<Index>(r));
    }
  }
  const Eigen::RowVectorXd mean = out.estimates.colwise().mean();
  const Matrix centered = out.estimates.rowwise() - mean;
  out.se = (centered.colwise().squaredNorm() / static_cast<double>(ok - 1)).cwiseSqrt().transpose();
  return out;
}

}  // namespace mvpcl
