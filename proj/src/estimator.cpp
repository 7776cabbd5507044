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

#include "mvpcl/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "mvpcl/parallel.hpp"
#include "mvpcl/variance.hpp"

namespace mvpcl {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string response_label(const MvpModel& model, Index k) {
  const auto& names = model.response_names();
  return names.empty() ? "y" + std::to_string(k + 1) : names[static_cast<std::size_t>(k)];
}

std::string group_label(const MvpModel& model, Index g) {
  return model.layout().is_shared() ? std::string("shared") : response_label(model, g);
}

std::string pair_label(const MvpModel& model, Index j, Index k) {
  return response_label(model, j) + "," + response_label(model, k);
}

void check_classes(const MvpModel& model) {
  const auto& y = model.y();
  for (Index k = 0; k < y.cols(); ++k) {
    const Index ones = y.col(k).cast<Index>().sum();
    if (ones == 0 || ones == y.rows()) {
      throw EstimationError("stage1", response_label(model, k),
                            "response has a single class (all " +
                                std::string(ones == 0 ? "0" : "1") + ")");
    }
  }
}

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

Vector FitResult::theta() const {
  Vector out(theta1.size() + static_cast<Index>(stage2.size()));
  out.head(theta1.size()) = theta1;
  out.tail(static_cast<Index>(stage2.size())) = rho();
  return out;
}

Vector FitResult::rho() const {
  Vector out(static_cast<Index>(stage2.size()));
  for (std::size_t m = 0; m < stage2.size(); ++m) {
    out[static_cast<Index>(m)] = stage2[m].rho;
  }
  return out;
}

Vector FitResult::robust_se() const {
  if (robust_cov.size() == 0) {
    return {};
  }
  return robust_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

GroupData group_data(const MvpModel& model, Index group) {
  GroupData d;
  d.components = model.layout().components_in_group(group);
  const Index n = model.n_obs();
  const auto blocks = static_cast<Index>(d.components.size());
  d.x.resize(n * blocks, model.n_coef());
  d.y.resize(n * blocks);
  bool unit = true;
  for (Index b = 0; b < blocks; ++b) {
    const Index k = d.components[static_cast<std::size_t>(b)];
    d.x.middleRows(b * n, n) = model.x()(Eigen::all, model.layout().columns(k));
    d.y.segment(b * n, n) = model.y().col(k);
    unit = unit && model.component_weight(k) == 1.0;
  }
  if (!unit) {
    d.weights.resize(static_cast<std::size_t>(n * blocks));
    for (Index b = 0; b < blocks; ++b) {
      const double w = model.component_weight(d.components[static_cast<std::size_t>(b)]);
      std::fill_n(d.weights.begin() + b * n, n, w);
    }
  }
  return d;
}

FitResult fit(const MvpModel& model, const FitOptions& options) {
  check_classes(model);
  const auto& layout = model.layout();
  const Index n_groups = layout.n_groups();
  const Index p = model.n_coef();
  const Index n_comp = model.n_components();

  FitResult result;
  auto start = Clock::now();
  result.stage1.resize(static_cast<std::size_t>(n_groups));
  parallel_for(n_groups, options.threads, [&](std::ptrdiff_t g) {
    const GroupData d = group_data(model, g);
    result.stage1[static_cast<std::size_t>(g)] =
        fit_uni_probit(d.x, d.y, options.solver, d.weights, group_label(model, g));
  });
  result.theta1.resize(model.n_theta1());
  for (Index g = 0; g < n_groups; ++g) {
    result.theta1.segment(layout.offset_of_group(g), p) = result.stage1[static_cast<std::size_t>(g)].beta;
    result.stage1_loglik += result.stage1[static_cast<std::size_t>(g)].loglik;
  }
  result.coefficients.resize(p, n_comp);
  for (Index k = 0; k < n_comp; ++k) {
    result.coefficients.col(k) = model.component_beta(result.theta1, k);
  }
  result.timings.stage1 = seconds_since(start);

  // Stage 2: every pair is an independent one-dimensional problem.
  start = Clock::now();
  const Matrix predictors = model.linear_predictors(result.theta1);
  const Index n_pairs = model.n_pairs();
  result.stage2.resize(static_cast<std::size_t>(n_pairs));
  parallel_for(n_pairs, options.threads, [&](std::ptrdiff_t m) {
    const auto [j, k] = pair_at(m, n_comp);
    const Vector a_j = predictors.col(j);
    const Vector a_k = predictors.col(k);
    const PairLikelihood likelihood(as_span(a_j), as_span(a_k), model.y().col(j), model.y().col(k));
    PairFit pf = fit_pair_rho(likelihood, options.solver, pair_label(model, j, k));
    pf.j = j;
    pf.k = k;
    result.stage2[static_cast<std::size_t>(m)] = pf;
  });
  result.correlation = Matrix::Identity(n_comp, n_comp);
  for (Index m = 0; m < n_pairs; ++m) {
    const PairFit& pf = result.stage2[static_cast<std::size_t>(m)];
    result.correlation(pf.j, pf.k) = pf.rho;
    result.correlation(pf.k, pf.j) = pf.rho;
    result.stage2_loglik += model.pair_weight(m) * pf.loglik;
  }
  result.min_eigenvalue =
      Eigen::SelfAdjointEigenSolver<Matrix>(result.correlation, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  result.timings.stage2 = seconds_since(start);

  if (options.compute_variance) {
    start = Clock::now();
    result.robust_cov = robust_covariance(result, model, options.threads);
    result.timings.variance = seconds_since(start);
  }
  return result;
}

CompositeLoglik composite_loglik(const Vector& theta1, const Matrix& correlation,
                                 const MvpModel& model) {
  const Index n_comp = model.n_components();
  if (theta1.size() != model.n_theta1()) {
    throw InputError("composite_loglik: theta1 has " + std::to_string(theta1.size()) +
                     " entries, expected " + std::to_string(model.n_theta1()));
  }
  if (correlation.rows() != n_comp || correlation.cols() != n_comp) {
    throw InputError("composite_loglik: correlation matrix must be K x K");
  }
  CompositeLoglik out;
  const Matrix predictors = model.linear_predictors(theta1);
  for (Index k = 0; k < n_comp; ++k) {
    const BinaryVector y = model.y().col(k);
    out.stage1_total += model.component_weight(k) *
                        uni_probit_loglik(model.component_beta(theta1, k),
                                          model.component_design(k), y);
  }
  for (Index m = 0; m < model.n_pairs(); ++m) {
    const auto [j, k] = pair_at(m, n_comp);
    const Vector a_j = predictors.col(j);
    const Vector a_k = predictors.col(k);
    out.stage2_total += model.pair_weight(m) * pair_loglik(correlation(j, k), as_span(a_j),
                                                           as_span(a_k), model.y().col(j),
                                                           model.y().col(k));
  }
  return out;
}

Matrix inverse_spd(const Matrix& a, const std::string& block) {
  if (a.size() == 0) {
    return a;
  }
  if (!a.allFinite()) {
    throw NumericError(block + " has non-finite entries");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  if (eig.info() != Eigen::Success) {
    throw NumericError(block + ": eigendecomposition failed");
  }
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    std::ostringstream msg;
    msg << block << " is singular or ill-conditioned (eigenvalues in [" << lo << ", " << hi
        << "])";
    throw NumericError(msg.str());
  }
  const Vector inv = eig.eigenvalues().cwiseInverse();
  const Matrix& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

Matrix nearest_correlation(const Matrix& correlation, double min_eigenvalue) {
  // Alternating projections with Dykstra's correction between the
  // positive semidefinite cone (eigenvalues floored) and unit-diagonal
  // matrices.
  const Index k = correlation.rows();
  Matrix y = 0.5 * (correlation + correlation.transpose());
  Matrix correction = Matrix::Zero(k, k);
  for (int iter = 0; iter < 1000; ++iter) {
    const Matrix r = y - correction;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
    const Vector clipped = eig.eigenvalues().cwiseMax(min_eigenvalue);
    const Matrix x = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    correction = x - r;
    Matrix next = x;
    next.diagonal().setOnes();
    const double change = (next - y).cwiseAbs().maxCoeff();
    y = std::move(next);
    if (change < 1e-12) {
      break;
    }
  }
  // Final pass guarantees the floor even if the loop stopped early.
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(y);
  const Vector clipped = eig.eigenvalues().cwiseMax(min_eigenvalue);
  Matrix x = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  const Vector d = x.diagonal().cwiseSqrt().cwiseInverse();
  x = d.asDiagonal() * x * d.asDiagonal();
  return 0.5 * (x + x.transpose());
}

}  // namespace mvpcl
