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

// Shared fixtures for the unit tests.

#pragma once

#include <cmath>
#include <functional>

#include "mvpcl/experiments.hpp"
#include "mvpcl/model.hpp"
#include "mvpcl/rng.hpp"
#include "mvpcl/verification.hpp"

namespace mvpcl::testing {

/// Simulated separate-coefficient model from the study design.
inline MvpModel design_model(Index n, Index k, Index p, double rho, std::uint64_t seed) {
  const Matrix x = make_design(n, p, seed);
  const BinaryMatrix y = simulate_y(
      SimSpec{design_coefficients(p, k), exchangeable_correlation(k, rho), x, seed, 1});
  return MvpModel(x, y);
}

/// Random correlation matrix with minimum eigenvalue at least `floor`.
inline Matrix random_correlation(Index k, RngStream& rng, double floor = 0.05) {
  for (;;) {
    Matrix a(k, k + 2);
    for (Index i = 0; i < a.size(); ++i) {
      a.data()[i] = rng.normal();
    }
    Matrix s = a * a.transpose();
    const Vector d = s.diagonal().cwiseSqrt().cwiseInverse();
    s = d.asDiagonal() * s * d.asDiagonal();
    if (Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues().minCoeff() > floor) {
      return s;
    }
  }
}

/// Central difference of f at x along coordinate i.
inline double central_diff(const std::function<double(const Vector&)>& f, const Vector& x, Index i,
                           double h) {
  Vector up = x;
  Vector down = x;
  up[i] += h;
  down[i] -= h;
  return (f(up) - f(down)) / (2.0 * h);
}

/// Relative difference with an absolute floor.
inline double rel_diff(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace mvpcl::testing
