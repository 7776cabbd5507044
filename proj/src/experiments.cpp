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

#include "mvpcl/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "mvpcl/estimator.hpp"
#include "mvpcl/numerics.hpp"
#include "mvpcl/parallel.hpp"
#include "mvpcl/rng.hpp"
#include "mvpcl/verification.hpp"

namespace mvpcl {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kTernaryP = 0.3;

MvpModel simulated_model(const Matrix& x, const Matrix& coefficients, const Matrix& correlation,
                         std::uint64_t seed, std::uint64_t stream) {
  SimSpec spec{coefficients, correlation, x, seed, stream};
  return MvpModel(x, simulate_y(spec));
}

}  // namespace

Matrix make_design(Index n_obs, Index n_coef, std::uint64_t seed) {
  if (n_obs < 1 || n_coef < 1) {
    throw InputError("design needs at least one row and one column");
  }
  RngStream rng(seed, 0);
  Matrix x(n_obs, n_coef);
  const double mean = 2.0 * kTernaryP;
  const double sd = std::sqrt(2.0 * kTernaryP * (1.0 - kTernaryP));
  for (Index i = 0; i < n_obs; ++i) {
    x(i, 0) = 1.0;
    for (Index j = 1; j + 1 < n_coef; ++j) {
      x(i, j) = rng.normal();
    }
    if (n_coef >= 2) {
      const int draws = (rng.uniform() < kTernaryP) + (rng.uniform() < kTernaryP);
      x(i, n_coef - 1) = (draws - mean) / sd;
    }
  }
  return x;
}

Matrix design_coefficients(Index n_coef, Index n_components) {
  Matrix b = Matrix::Zero(n_coef, n_components);
  for (Index k = 0; k < n_components; ++k) {
    b(0, k) = -static_cast<double>(k + 1) / 5.0;
    if (n_coef >= 2) {
      b(1, k) = 0.5;
    }
  }
  return b;
}

Matrix exchangeable_correlation(Index n_components, double rho) {
  Matrix c = Matrix::Constant(n_components, n_components, rho);
  c.diagonal().setOnes();
  return c;
}

CoverageResult run_coverage(const CoverageOptions& options) {
  if (!(options.level > 0.0 && options.level <= 1.0)) {
    throw InputError("coverage level must lie in (0, 1]");
  }
  if (options.reps < 1) {
    throw InputError("coverage needs at least one replicate");
  }
  const auto start = Clock::now();
  const Index k = options.n_components;
  const Index p = options.n_coef;
  const Matrix x = make_design(options.n_obs, p, options.seed);
  const Matrix truth_b = design_coefficients(p, k);
  const Matrix truth_c = exchangeable_correlation(k, options.rho);
  const double z = options.level >= 1.0 ? INFINITY : norm_quantile(0.5 + 0.5 * options.level);

  const Index n1 = p * k;
  const Index m = n_pairs_of(k);
  Vector truth(n1 + m);
  for (Index c = 0; c < k; ++c) {
    truth.segment(c * p, p) = truth_b.col(c);
  }
  for (Index q = 0; q < m; ++q) {
    const auto [i, j] = pair_at(q, k);
    truth[n1 + q] = truth_c(i, j);
  }

  struct Rep {
    Vector estimate;
    Vector se;
  };
  std::vector<std::optional<Rep>> reps(static_cast<std::size_t>(options.reps));
  FitOptions fit_options;
  fit_options.threads = 1;
  parallel_for(options.reps, options.threads, [&](std::ptrdiff_t r) {
    try {
      const MvpModel model = simulated_model(x, truth_b, truth_c, options.seed,
                                             static_cast<std::uint64_t>(r) + 1);
      const FitResult fit_result = fit(model, fit_options);
      reps[static_cast<std::size_t>(r)] = Rep{fit_result.theta(), fit_result.robust_se()};
    } catch (const EstimationError&) {
    } catch (const NumericError&) {
    }
  });

  CoverageResult out;
  out.requested = options.reps;
  std::vector<CoverageRow> rows(static_cast<std::size_t>(n1 + m));
  Vector hits = Vector::Zero(n1 + m);
  Vector sum = Vector::Zero(n1 + m);
  Vector sum_sq = Vector::Zero(n1 + m);
  Vector sum_se = Vector::Zero(n1 + m);
  for (const auto& rep : reps) {
    if (!rep) {
      ++out.failed;
      continue;
    }
    ++out.succeeded;
    for (Index q = 0; q < n1 + m; ++q) {
      const double est = rep->estimate[q];
      const double se = rep->se[q];
      hits[q] += std::abs(est - truth[q]) <= z * se ? 1.0 : 0.0;
      sum[q] += est;
      sum_sq[q] += est * est;
      sum_se[q] += se;
    }
  }
  if (out.succeeded == 0) {
    throw EstimationError("coverage", "replicates", "every replicate failed");
  }
  const double ns = static_cast<double>(out.succeeded);
  for (Index q = 0; q < n1 + m; ++q) {
    CoverageRow row;
    if (q < n1) {
      row.parameter = "beta[x" + std::to_string(q % p) + ",y" + std::to_string(q / p + 1) + "]";
    } else {
      const auto [i, j] = pair_at(q - n1, k);
      row.parameter = "rho[y" + std::to_string(i + 1) + ",y" + std::to_string(j + 1) + "]";
    }
    row.truth = truth[q];
    row.coverage = 100.0 * hits[q] / ns;
    row.mean_estimate = sum[q] / ns;
    row.mean_se = sum_se[q] / ns;
    const double var = out.succeeded > 1
                           ? std::max(sum_sq[q] - ns * row.mean_estimate * row.mean_estimate, 0.0) /
                                 (ns - 1.0)
                           : 0.0;
    row.empirical_sd = std::sqrt(var);
    (q < n1 ? out.coefficients : out.correlations).push_back(row);
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

std::vector<TimingCell> run_timing(const TimingOptions& options) {
  if (options.reps < 1) {
    throw InputError("timing needs at least one replicate");
  }
  std::vector<TimingCell> cells;
  FitOptions fit_options;
  fit_options.threads = options.threads;
  fit_options.compute_variance = false;
  for (const Index n : options.n_values) {
    for (const Index k : options.k_values) {
      for (const Index p : options.p_values) {
        const Matrix x = make_design(n, p, options.seed);
        const Matrix b = design_coefficients(p, k);
        const Matrix c = exchangeable_correlation(k, options.rho);
        TimingCell cell{n, k, p, options.reps, 0.0, INFINITY};
        for (Index r = 0; r < options.reps; ++r) {
          const MvpModel model =
              simulated_model(x, b, c, options.seed, static_cast<std::uint64_t>(r) + 1);
          const auto start = Clock::now();
          (void)fit(model, fit_options);
          const double s = std::chrono::duration<double>(Clock::now() - start).count();
          cell.mean_seconds += s;
          cell.min_seconds = std::min(cell.min_seconds, s);
        }
        cell.mean_seconds /= static_cast<double>(options.reps);
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

}  // namespace mvpcl
