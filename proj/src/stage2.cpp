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

#include "mvpcl/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "mvpcl/kernels.hpp"
#include "mvpcl/numerics.hpp"

namespace mvpcl {
namespace {

constexpr int kBrentBits = 26;
constexpr double kBracketStep = 0.25;
constexpr int kPolishIterations = 12;

int sign_of(int y) { return y != 0 ? 1 : -1; }

void check_sizes(Index a_j, Index a_k, Index y_j, Index y_k) {
  if (a_j != a_k || a_j != y_j || a_j != y_k) {
    throw InputError("pair likelihood: predictor and response lengths disagree");
  }
}

}  // namespace

double pair_cell_prob(int y_j, int y_k, double a_j, double a_k, double rho) {
  const int q_j = sign_of(y_j);
  const int q_k = sign_of(y_k);
  return bvn_cdf(q_j * a_j, q_k * a_k, q_j * q_k * rho);
}

PairLikelihood::PairLikelihood(std::span<const double> a_j, std::span<const double> a_k,
                               const BinaryVector& y_j, const BinaryVector& y_k) {
  check_sizes(static_cast<Index>(a_j.size()), static_cast<Index>(a_k.size()), y_j.size(),
              y_k.size());
  const std::size_t n = a_j.size();
  h_.reserve(n);
  k_.reserve(n);
  sign_.reserve(n);
  Index n11 = 0;
  Index n1 = 0;
  Index n2 = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const int wanted = pass == 0 ? 1 : -1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Index>(i);
      const int q_j = sign_of(y_j[ii]);
      const int q_k = sign_of(y_k[ii]);
      if (q_j * q_k != wanted) {
        continue;
      }
      h_.push_back(q_j * a_j[i]);
      k_.push_back(q_k * a_k[i]);
      sign_.push_back(wanted);
      if (pass == 0) {
        ++n_concordant_;
      }
    }
  }
  for (Index i = 0; i < y_j.size(); ++i) {
    n1 += y_j[i] != 0;
    n2 += y_k[i] != 0;
    n11 += (y_j[i] != 0) && (y_k[i] != 0);
  }
  const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
  p11_ = static_cast<double>(n11) / nn;
  p1_ = static_cast<double>(n1) / nn;
  p2_ = static_cast<double>(n2) / nn;
}

double PairLikelihood::loglik(double rho) const {
  if (!(std::abs(rho) < 1.0)) {
    throw std::domain_error("pair likelihood: |rho| must be below 1");
  }
  std::vector<double> prob(h_.size());
  const std::span<const double> h(h_);
  const std::span<const double> k(k_);
  const std::span<double> out(prob);
  const std::size_t nc = n_concordant_;
  kernels::bvn_cdf(h.first(nc), k.first(nc), rho, out.first(nc));
  kernels::bvn_cdf(h.subspan(nc), k.subspan(nc), -rho, out.subspan(nc));
  return kernels::sum_log_clamped(out.first(nc)) + kernels::sum_log_clamped(out.subspan(nc));
}

std::pair<double, double> PairLikelihood::score_curvature(double rho) const {
  double score = 0.0;
  double curvature = 0.0;
  for (std::size_t i = 0; i < h_.size(); ++i) {
    const double c = sign_[i];
    const double r = c * rho;
    const double h = h_[i];
    const double k = k_[i];
    const double p = clamp_prob(bvn_cdf(h, k, r));
    const double dens = bvn_pdf(h, k, r);
    const double s = c * dens / p;
    const double one_m = 1.0 - r * r;
    const double quad = h * h - 2.0 * r * h * k + k * k;
    const double ddens_dr = dens * ((r + h * k) / one_m - r * quad / (one_m * one_m));
    score += s;
    curvature += ddens_dr / p - s * s;
  }
  return {score, curvature};
}

double PairLikelihood::start_value() const {
  const double p10 = p1_ - p11_;
  const double p01 = p2_ - p11_;
  const double p00 = 1.0 - p1_ - p2_ + p11_;
  if (!(p11_ > 0.0 && p10 > 0.0 && p01 > 0.0 && p00 > 0.0)) {
    return 0.0;
  }
  return std::clamp(std::sin(2.0 * std::numbers::pi * (p11_ - p1_ * p2_)), -0.5, 0.5);
}

double pair_loglik(double rho, std::span<const double> a_j, std::span<const double> a_k,
                   const BinaryVector& y_j, const BinaryVector& y_k) {
  return PairLikelihood(a_j, a_k, y_j, y_k).loglik(rho);
}

double pair_loglik(double rho, const Matrix& x, const BinaryVector& y_j, const BinaryVector& y_k,
                   const Vector& beta_j, const Vector& beta_k) {
  if (beta_j.size() != x.cols() || beta_k.size() != x.cols()) {
    throw InputError("pair likelihood: coefficient vectors do not match the design");
  }
  const Vector a_j = x * beta_j;
  const Vector a_k = x * beta_k;
  return pair_loglik(rho, std::span<const double>(a_j.data(), a_j.size()),
                     std::span<const double>(a_k.data(), a_k.size()), y_j, y_k);
}

PairFit fit_pair_rho(const PairLikelihood& likelihood, const SolverOptions& options,
                     const std::string& label) {
  const double bound = 1.0 - options.rho_clamp;
  const double t_max = std::atanh(bound);
  PairFit fit;

  auto to_rho = [&](double t) { return std::clamp(std::tanh(t), -bound, bound); };
  auto objective = [&](double t) {
    ++fit.evaluations;
    if (fit.evaluations > options.max_rho_evaluations) {
      throw EstimationError("stage2", label,
                            "correlation search exceeded " +
                                std::to_string(options.max_rho_evaluations) + " evaluations");
    }
    return -likelihood.loglik(to_rho(t));
  };

  // Bracket the maximizer, walking downhill from the moment start.
  const double t0 = std::atanh(likelihood.start_value());
  double lo = std::max(t0 - kBracketStep, -t_max);
  double hi = std::min(t0 + kBracketStep, t_max);
  const double f0 = objective(t0);
  const double f_hi = objective(hi);
  const double f_lo = objective(lo);
  if (f_hi < f0 || f_lo < f0) {
    const double dir = f_hi < f_lo ? 1.0 : -1.0;
    double prev = t0;
    double cur = dir > 0 ? hi : lo;
    double f_cur = dir > 0 ? f_hi : f_lo;
    double step = kBracketStep;
    double next = cur;
    while (std::abs(cur) < t_max) {
      step *= 2.0;
      next = std::clamp(cur + dir * step, -t_max, t_max);
      const double f_next = objective(next);
      if (f_next >= f_cur) {
        break;
      }
      prev = cur;
      cur = next;
      f_cur = f_next;
    }
    lo = std::min(prev, next);
    hi = std::max(prev, next);
  }

  const auto brent_limit =
      static_cast<std::uintmax_t>(std::max(options.max_rho_evaluations - fit.evaluations, 1));
  std::uintmax_t max_iter = brent_limit;
  const auto [t_best, f_best] =
      boost::math::tools::brent_find_minima(objective, lo, hi, kBrentBits, max_iter);
  double rho = to_rho(t_best);
  double ll = -f_best;

  // Newton polish on the rho scale with the analytic derivatives.
  double last_delta = INFINITY;
  for (int it = 0; it < kPolishIterations; ++it) {
    const auto [score, curvature] = likelihood.score_curvature(rho);
    if (!(curvature < 0.0) || !std::isfinite(score)) {
      break;
    }
    const double candidate = std::clamp(rho - score / curvature, -bound, bound);
    const double delta = std::abs(candidate - rho);
    if (delta == 0.0) {
      last_delta = 0.0;
      break;
    }
    ++fit.evaluations;
    const double cand_ll = likelihood.loglik(candidate);
    if (cand_ll < ll - 1e-12 * std::abs(ll)) {
      break;
    }
    rho = candidate;
    ll = cand_ll;
    last_delta = delta;
    if (delta <= 1e-3 * options.rho_tol) {
      break;
    }
  }

  // An optimum pressed against the clamp is reported at the clamp itself.
  if (std::abs(rho) >= bound - options.boundary_tol) {
    const double edge = std::copysign(bound, rho);
    const double outward = likelihood.score_curvature(edge).first * edge;
    if (outward >= 0.0) {
      rho = edge;
      ll = likelihood.loglik(rho);
    }
    fit.boundary = true;
  }

  fit.converged = fit.boundary || last_delta <= options.rho_tol || max_iter < brent_limit;
  if (!fit.converged || !std::isfinite(ll)) {
    std::ostringstream msg;
    msg << "correlation search did not converge (rho " << rho << ", loglik " << ll
        << ", last Newton step " << last_delta << ", " << fit.evaluations << " evaluations)";
    throw EstimationError("stage2", label, msg.str());
  }
  fit.rho = rho;
  fit.loglik = ll;
  return fit;
}

PairFit fit_pair_rho(const Matrix& x, const BinaryVector& y_j, const BinaryVector& y_k,
                     const Vector& beta_j, const Vector& beta_k, const SolverOptions& options) {
  if (beta_j.size() != x.cols() || beta_k.size() != x.cols()) {
    throw InputError("pair fit: coefficient vectors do not match the design");
  }
  const Vector a_j = x * beta_j;
  const Vector a_k = x * beta_k;
  const PairLikelihood likelihood(std::span<const double>(a_j.data(), a_j.size()),
                                  std::span<const double>(a_k.data(), a_k.size()), y_j, y_k);
  return fit_pair_rho(likelihood, options);
}

PairObsDerivatives pair_obs_derivatives(int y_j, int y_k, double a_j, double a_k, double rho) {
  const double q_j = sign_of(y_j);
  const double q_k = sign_of(y_k);
  const double c = q_j * q_k;
  const double h = q_j * a_j;
  const double k = q_k * a_k;
  const double r = c * rho;
  const double one_m = 1.0 - r * r;
  const double root = std::sqrt(one_m);

  PairObsDerivatives d{};
  d.prob = clamp_prob(bvn_cdf(h, k, r));
  const double dens = bvn_pdf(h, k, r);
  const double ratio = dens / d.prob;
  d.score = c * ratio;

  const double quad = h * h - 2.0 * r * h * k + k * k;
  const double ddens_dr = dens * ((r + h * k) / one_m - r * quad / (one_m * one_m));
  d.curvature = ddens_dr / d.prob - d.score * d.score;

  // d/dh of dens and of the CDF; the k case swaps roles.
  const double ddens_dh = -dens * (h - r * k) / one_m;
  const double ddens_dk = -dens * (k - r * h) / one_m;
  const double dp_dh = norm_pdf(h) * norm_cdf((k - r * h) / root);
  const double dp_dk = norm_pdf(k) * norm_cdf((h - r * k) / root);
  d.dscore_daj = c * q_j * (ddens_dh - ratio * dp_dh) / d.prob;
  d.dscore_dak = c * q_k * (ddens_dk - ratio * dp_dk) / d.prob;
  return d;
}

}  // namespace mvpcl
