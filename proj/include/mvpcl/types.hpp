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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mvpcl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Binary responses are stored as bytes; every entry is 0 or 1.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using BinaryVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad CSV, missing columns, inconsistent dimensions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A stage of the estimator failed. `stage()` is "stage1" or "stage2" and
/// `where()` names the component or pair.
class EstimationError : public Error {
 public:
  EstimationError(std::string stage, std::string where, const std::string& what)
      : Error(stage + " [" + where + "]: " + what),
        stage_(std::move(stage)),
        where_(std::move(where)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& where() const noexcept { return where_; }

 private:
  std::string stage_;
  std::string where_;
};

/// Complete or quasi-complete separation in a univariate probit fit.
class SeparationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

/// Singular or non-finite intermediate results (variance assembly, etc.).
class NumericError : public Error {
 public:
  using Error::Error;
};

struct SolverOptions {
  // Stage 1 (Newton-Raphson).
  double gradient_tol = 1e-10;  // max |mean score| on standardized columns
  int max_iterations = 100;
  double separation_threshold = 1e4;

  // Stage 2 (bounded 1-D search on atanh(rho)).
  double rho_tol = 1e-8;
  double rho_clamp = 1e-6;
  double boundary_tol = 1e-5;
  int max_rho_evaluations = 200;
};

}  // namespace mvpcl
