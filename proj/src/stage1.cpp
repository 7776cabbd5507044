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

#include "mvpcl/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mvpcl/kernels.hpp"

namespace mvpcl {
namespace {

// A Newton step counts as negligible below this size on standardized
// columns. Requiring it alongside a small gradient keeps slowly diverging
// fits (separated data, where the gradient vanishes before the
// coefficients settle) from being reported as converged.
constexpr double kStepTol = 1e-7;

// Relative loglik slack for accepting a step, and the largest step that
// still counts as a stall rather than divergence.
constexpr double kRoundingSlack = 1e-14;
constexpr double kStallStep = 1e-4;

void check_dims(const Matrix& x, const BinaryVector& y, RowWeights weights) {
  if (x.rows() != y.size()) {
    throw InputError("probit: design has " + std::to_string(x.rows()) + " rows, response has " +
                     std::to_string(y.size()));
  }
  if (!weights.empty() && static_cast<Index>(weights.size()) != y.size()) {
    throw InputError("probit: row weights do not match the number of rows");
  }
}

double row_weight(RowWeights weights, Index i) {
  return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
}

// Per-row quantities at a given linear predictor: eta = q a,
// log Phi(eta) and the Mills ratio phi(eta) / Phi(eta).
struct RowTerms {
  Vector eta;
  Vector log_cdf;
  Vector mills;

  RowTerms(const Vector& a, const BinaryVector& y)
      : eta(a.size()), log_cdf(a.size()), mills(a.size()) {
    for (Index i = 0; i < a.size(); ++i) {
      eta[i] = y[i] != 0 ? a[i] : -a[i];
    }
    kernels::probit_terms(std::span<const double>(eta.data(), eta.size()),
                          std::span<double>(log_cdf.data(), log_cdf.size()),
                          std::span<double>(mills.data(), mills.size()));
  }

  double loglik(RowWeights weights) const {
    double total = 0.0;
    for (Index i = 0; i < log_cdf.size(); ++i) {
      total += row_weight(weights, i) * log_cdf[i];
    }
    return total;
  }

  // d loglik / d a and -d2 loglik / d a2 per row.
  void derivatives(const BinaryVector& y, RowWeights weights, Vector& residual,
                   Vector& curvature) const {
    residual.resize(eta.size());
    curvature.resize(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
      const double w = row_weight(weights, i);
      const double lambda = mills[i];
      residual[i] = w * (y[i] != 0 ? lambda : -lambda);
      curvature[i] = w * lambda * (lambda + eta[i]);
    }
  }
};

}  // namespace

double uni_probit_loglik(const Vector& beta, const Matrix& x, const BinaryVector& y,
                         RowWeights weights) {
  check_dims(x, y, weights);
  if (beta.size() != x.cols()) {
    throw InputError("probit: coefficient vector has " + std::to_string(beta.size()) +
                     " entries, design has " + std::to_string(x.cols()) + " columns");
  }
  return RowTerms(x * beta, y).loglik(weights);
}

ScoreHessian uni_score_hessian(const Vector& beta, const Matrix& x, const BinaryVector& y,
                               RowWeights weights) {
  check_dims(x, y, weights);
  if (beta.size() != x.cols()) {
    throw InputError("probit: coefficient vector does not match the design");
  }
  const RowTerms terms(x * beta, y);
  Vector residual;
  Vector curvature;
  terms.derivatives(y, weights, residual, curvature);

  ScoreHessian out;
  out.score_per_obs = residual.asDiagonal() * x;
  const double n = static_cast<double>(std::max<Index>(x.rows(), 1));
  out.neg_hessian_mean = (x.transpose() * curvature.asDiagonal() * x) / n;
  out.neg_hessian_mean = 0.5 * (out.neg_hessian_mean + out.neg_hessian_mean.transpose()).eval();
  return out;
}

UnivariateFit fit_uni_probit(const Matrix& x, const BinaryVector& y, const SolverOptions& options,
                             RowWeights weights, const std::string& label, const Vector& start) {
  check_dims(x, y, weights);
  const Index n = x.rows();
  const Index p = x.cols();
  if (start.size() != 0 && start.size() != p) {
    throw InputError("probit: start vector does not match the design");
  }

  const Index ones = y.cast<Index>().sum();
  if (ones == 0 || ones == n) {
    throw EstimationError("stage1", label, "response has a single class");
  }

  Vector scale(p);
  for (Index j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
    scale[j] = sd > 1e-12 * (1.0 + std::abs(mean)) ? sd : 1.0;
  }
  const Matrix xs = x * scale.cwiseInverse().asDiagonal();

  const Eigen::ColPivHouseholderQR<Matrix> qr(xs);
  if (qr.rank() < p) {
    throw EstimationError("stage1", label,
                          "design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                              " of " + std::to_string(p) + " columns)");
  }

  Vector gamma = start.size() == p ? Vector(start.cwiseProduct(scale)) : Vector::Zero(p);
  RowTerms terms(xs * gamma, y);
  double ll = terms.loglik(weights);

  // Gradient is judged per observation so the tolerance does not tighten
  // with sample size.
  const double total_weight =
      weights.empty() ? static_cast<double>(n) : std::accumulate(weights.begin(), weights.end(), 0.0);

  UnivariateFit fit;
  Vector residual;
  Vector curvature;
  double max_grad = 0.0;
  double last_step = 0.0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    terms.derivatives(y, weights, residual, curvature);
    const Vector grad = xs.transpose() * residual;
    const Matrix info = xs.transpose() * curvature.asDiagonal() * xs;
    max_grad = grad.cwiseAbs().maxCoeff() / total_weight;

    const Eigen::LDLT<Matrix> ldlt(info);
    const Vector step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || !(ldlt.vectorD().minCoeff() > 0.0)) {
      throw SeparationError("stage1", label,
                            "information matrix became singular as coefficients grew; the "
                            "response appears separated by the predictors");
    }
    last_step = step.cwiseAbs().maxCoeff();
    if (max_grad <= options.gradient_tol && last_step <= kStepTol) {
      fit.converged = true;
      break;
    }

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      Vector candidate = gamma + t * step;
      if (candidate.cwiseAbs().maxCoeff() > options.separation_threshold) {
        throw SeparationError("stage1", label,
                              "coefficients diverge beyond the separation threshold; the "
                              "response appears separated by the predictors");
      }
      RowTerms next(xs * candidate, y);
      const double next_ll = next.loglik(weights);
      // Near the optimum the change drops below the rounding of the sum.
      if (next_ll >= ll - kRoundingSlack * (1.0 + std::abs(ll))) {
        gamma = std::move(candidate);
        terms = std::move(next);
        ll = next_ll;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent left at rounding level. A large step with a vanishing
      // gradient is the separation signature and is handled below.
      fit.converged = max_grad <= options.gradient_tol && last_step <= kStallStep;
      break;
    }
  }

  if (!fit.converged) {
    std::ostringstream msg;
    msg << "Newton iterations did not converge after " << fit.iterations
        << " iterations (max mean |gradient| " << max_grad << ", last step " << last_step << ")";
    if (max_grad <= options.gradient_tol) {
      msg << "; coefficients keep growing with a vanishing gradient, which indicates separation";
      throw SeparationError("stage1", label, msg.str());
    }
    throw EstimationError("stage1", label, msg.str());
  }

  fit.beta = gamma.cwiseQuotient(scale);
  fit.loglik = uni_probit_loglik(fit.beta, x, y, weights);
  ScoreHessian sh = uni_score_hessian(fit.beta, x, y, weights);
  fit.score_per_obs = std::move(sh.score_per_obs);
  fit.neg_hessian = std::move(sh.neg_hessian_mean);
  return fit;
}

}  // namespace mvpcl
