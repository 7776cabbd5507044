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

#include "mvpcl/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "mvpcl/numerics.hpp"
#include "mvpcl/parallel.hpp"
#include "mvpcl/rng.hpp"

namespace mvpcl {
namespace {

constexpr Index kMaxRectDim = 6;

void check_correlation(const Matrix& c, const char* what) {
  const Index k = c.rows();
  if (c.cols() != k || k == 0) {
    throw InputError(std::string(what) + " must be a non-empty square matrix");
  }
  if (!c.allFinite()) {
    throw InputError(std::string(what) + " has non-finite entries");
  }
  for (Index i = 0; i < k; ++i) {
    if (std::abs(c(i, i) - 1.0) > 1e-12) {
      throw InputError(std::string(what) + " must have a unit diagonal");
    }
    for (Index j = 0; j < i; ++j) {
      if (std::abs(c(i, j) - c(j, i)) > 1e-12) {
        throw InputError(std::string(what) + " must be symmetric");
      }
    }
  }
  const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(c, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (!(lo > 1e-8)) {
    throw InputError(std::string(what) + " is not positive definite (minimum eigenvalue " +
                     std::to_string(lo) + ")");
  }
}

// P(a < Z <= b) for a standard normal, taken from whichever tail keeps
// precision.
double interval_prob(double a, double b) {
  if (b == INFINITY) {
    return norm_cdf(-a);
  }
  if (a == -INFINITY) {
    return norm_cdf(b);
  }
  if (a > 0.0) {
    return std::max(norm_cdf(-a) - norm_cdf(-b), 0.0);
  }
  return std::max(norm_cdf(b) - norm_cdf(a), 0.0);
}

// Quantile of a standard normal truncated to (a, b] at relative position w.
double truncated_quantile(double a, double b, double w) {
  constexpr double kTiny = 1e-300;
  constexpr double kNearOne = 1.0 - 0x1.0p-53;
  if (a > 0.0) {
    const double upper = norm_cdf(-a);
    const double t = upper - w * (upper - norm_cdf(-b));
    return -norm_quantile(std::clamp(t, kTiny, kNearOne));
  }
  const double lower = norm_cdf(a);
  const double t = lower + w * (norm_cdf(b) - lower);
  return norm_quantile(std::clamp(t, kTiny, kNearOne));
}

// Separation-of-variables integrand on [0, 1]^(K-1) for standardized
// limits and the Cholesky factor of the (reordered) correlation matrix.
class SovIntegrand {
 public:
  SovIntegrand(std::vector<double> a, std::vector<double> b, Matrix chol)
      : a_(std::move(a)), b_(std::move(b)), l_(std::move(chol)) {}

  Index dim() const { return static_cast<Index>(a_.size()) - 1; }

  double operator()(const double* w) const {
    const Index k = static_cast<Index>(a_.size());
    std::array<double, kMaxRectDim> y{};
    double lo = a_[0] / l_(0, 0);
    double hi = b_[0] / l_(0, 0);
    double f = interval_prob(lo, hi);
    for (Index i = 1; i < k && f > 0.0; ++i) {
      y[static_cast<std::size_t>(i - 1)] = truncated_quantile(lo, hi, w[i - 1]);
      double s = 0.0;
      for (Index l = 0; l < i; ++l) {
        s += l_(i, l) * y[static_cast<std::size_t>(l)];
      }
      lo = (a_[static_cast<std::size_t>(i)] - s) / l_(i, i);
      hi = (b_[static_cast<std::size_t>(i)] - s) / l_(i, i);
      f *= interval_prob(lo, hi);
    }
    return f;
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
  Matrix l_;
};

// Richtmyer rank-1 lattice generators: square roots of the primes.
constexpr std::array<double, kMaxRectDim - 1> kLatticePrimes = {2.0, 3.0, 5.0, 7.0, 11.0};

RectProb lattice_rule(const SovIntegrand& f, const RectOptions& options) {
  const Index dim = f.dim();
  const Index shifts = std::max<Index>(options.shifts, 2);
  std::array<double, kMaxRectDim - 1> alpha{};
  for (Index j = 0; j < dim; ++j) {
    const double r = std::sqrt(kLatticePrimes[static_cast<std::size_t>(j)]);
    alpha[static_cast<std::size_t>(j)] = r - std::floor(r);
  }
  RngStream rng(options.seed, 0);
  std::vector<double> shift(static_cast<std::size_t>(shifts * dim));
  for (auto& s : shift) {
    s = rng.uniform();
  }

  RectProb out;
  Index points = options.min_points;
  while (true) {
    std::vector<double> estimates(static_cast<std::size_t>(shifts));
    std::array<double, kMaxRectDim - 1> w{};
    std::array<double, kMaxRectDim - 1> w_anti{};
    for (Index s = 0; s < shifts; ++s) {
      double acc = 0.0;
      for (Index n = 1; n <= points; ++n) {
        for (Index j = 0; j < dim; ++j) {
          const double x = static_cast<double>(n) * alpha[static_cast<std::size_t>(j)] +
                           shift[static_cast<std::size_t>(s * dim + j)];
          // Tent (baker's) transform of the fractional part.
          const double t = std::abs(2.0 * (x - std::floor(x)) - 1.0);
          w[static_cast<std::size_t>(j)] = t;
          w_anti[static_cast<std::size_t>(j)] = 1.0 - t;
        }
        acc += 0.5 * (f(w.data()) + f(w_anti.data()));
      }
      estimates[static_cast<std::size_t>(s)] = acc / static_cast<double>(points);
    }
    const double ns = static_cast<double>(shifts);
    const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / ns;
    double ss = 0.0;
    for (double e : estimates) {
      ss += (e - mean) * (e - mean);
    }
    out.value = std::clamp(mean, 0.0, 1.0);
    out.error = 3.0 * std::sqrt(ss / (ns - 1.0) / ns);
    out.points = points * shifts;
    // Three standard errors from 12 shifts is not a hard bound; keep a
    // factor of two in reserve.
    if (options.fixed_points || 2.0 * out.error <= options.abs_tol ||
        points >= options.max_points) {
      return out;
    }
    points *= 2;
  }
}

}  // namespace

BinaryMatrix simulate_y(const Matrix& predictors, const Matrix& correlation, std::uint64_t seed,
                        std::uint64_t stream) {
  check_correlation(correlation, "simulation correlation matrix");
  const Index n = predictors.rows();
  const Index k = predictors.cols();
  if (correlation.rows() != k) {
    throw InputError("simulation: correlation matrix is " + std::to_string(correlation.rows()) +
                     " x " + std::to_string(correlation.rows()) + " but there are " +
                     std::to_string(k) + " components");
  }
  const Matrix l = correlation.llt().matrixL();
  RngStream rng(seed, stream);
  BinaryMatrix y(n, k);
  Vector u(k);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < k; ++c) {
      u[c] = rng.normal();
    }
    const Vector z = l * u;
    for (Index c = 0; c < k; ++c) {
      y(i, c) = z[c] <= predictors(i, c) ? 1 : 0;
    }
  }
  return y;
}

BinaryMatrix simulate_y(const SimSpec& spec) {
  if (spec.coefficients.rows() != spec.x.cols()) {
    throw InputError("simulation: coefficient rows do not match the design width");
  }
  return simulate_y(spec.x * spec.coefficients, spec.correlation, spec.seed, spec.stream);
}

RectProb mvn_rect_prob(std::span<const Interval> limits, const Matrix& sigma,
                       const RectOptions& options) {
  const auto k = static_cast<Index>(limits.size());
  if (k < 1 || k > kMaxRectDim) {
    throw InputError("rectangle probabilities support 1 to " + std::to_string(kMaxRectDim) +
                     " dimensions, got " + std::to_string(k));
  }
  if (sigma.rows() != k || sigma.cols() != k || !sigma.allFinite()) {
    throw InputError("rectangle probability: covariance must be a finite K x K matrix");
  }
  for (const Interval& iv : limits) {
    if (std::isnan(iv.lower) || std::isnan(iv.upper) || iv.lower > iv.upper) {
      throw InputError("rectangle probability: each interval needs lower <= upper");
    }
    if (iv.lower == iv.upper) {
      return {};
    }
  }

  // Standardize, then reflect half-lines (a, inf) to (-inf, -a] so that
  // one-sided limits are always upper limits.
  std::vector<double> a(static_cast<std::size_t>(k));
  std::vector<double> b(static_cast<std::size_t>(k));
  Vector sign = Vector::Ones(k);
  Vector sd(k);
  for (Index i = 0; i < k; ++i) {
    if (!(sigma(i, i) > 0.0)) {
      throw NumericError("rectangle probability: covariance is not positive definite");
    }
    sd[i] = std::sqrt(sigma(i, i));
    double lo = limits[static_cast<std::size_t>(i)].lower / sd[i];
    double hi = limits[static_cast<std::size_t>(i)].upper / sd[i];
    if (hi == INFINITY && lo != -INFINITY) {
      sign[i] = -1.0;
      std::tie(lo, hi) = std::pair(-hi, -lo);
    }
    a[static_cast<std::size_t>(i)] = lo;
    b[static_cast<std::size_t>(i)] = hi;
  }
  const Vector scale = sign.cwiseQuotient(sd);
  const Matrix corr = scale.asDiagonal() * sigma * scale.asDiagonal();
  const Eigen::LLT<Matrix> llt_check(corr);
  if (llt_check.info() != Eigen::Success) {
    throw NumericError("rectangle probability: covariance is not positive definite");
  }

  if (k == 1) {
    return {interval_prob(a[0], b[0]), 0.0, 0};
  }
  if (k == 2 && !options.force_qmc) {
    const double r = std::clamp(corr(0, 1), -1.0, 1.0);
    auto cdf = [&](double h, double kk) { return bvn_cdf(h, kk, r); };
    const double p = cdf(b[0], b[1]) - cdf(a[0], b[1]) - cdf(b[0], a[1]) + cdf(a[0], a[1]);
    return {std::clamp(p, 0.0, 1.0), 1e-14, 0};
  }

  // Integrate the narrowest intervals first.
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return interval_prob(a[static_cast<std::size_t>(x)], b[static_cast<std::size_t>(x)]) <
           interval_prob(a[static_cast<std::size_t>(y)], b[static_cast<std::size_t>(y)]);
  });
  std::vector<double> a_ord(static_cast<std::size_t>(k));
  std::vector<double> b_ord(static_cast<std::size_t>(k));
  Matrix c_ord(k, k);
  for (Index i = 0; i < k; ++i) {
    a_ord[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    b_ord[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    for (Index j = 0; j < k; ++j) {
      c_ord(i, j) = corr(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  const Matrix chol = c_ord.llt().matrixL();
  return lattice_rule(SovIntegrand(std::move(a_ord), std::move(b_ord), chol), options);
}

FullLoglik full_loglik(const Vector& theta1, const Matrix& correlation, const MvpModel& model,
                       const RectOptions& options, int threads) {
  const Index k = model.n_components();
  if (k > kMaxRectDim) {
    throw InputError("full likelihood supports at most " + std::to_string(kMaxRectDim) +
                     " components, model has " + std::to_string(k));
  }
  if (theta1.size() != model.n_theta1()) {
    throw InputError("full likelihood: theta1 does not match the model");
  }
  const Matrix predictors = model.linear_predictors(theta1);
  const Index n = model.n_obs();

  // Limits of each row; duplicates map to one evaluation.
  std::map<std::vector<double>, Index> unique;
  std::vector<Index> slot(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> keys;
  for (Index i = 0; i < n; ++i) {
    std::vector<double> key(static_cast<std::size_t>(2 * k));
    for (Index c = 0; c < k; ++c) {
      const bool one = model.y()(i, c) != 0;
      key[static_cast<std::size_t>(2 * c)] = one ? -INFINITY : predictors(i, c);
      key[static_cast<std::size_t>(2 * c + 1)] = one ? predictors(i, c) : INFINITY;
    }
    const auto [it, inserted] = unique.try_emplace(key, static_cast<Index>(keys.size()));
    if (inserted) {
      keys.push_back(std::move(key));
    }
    slot[static_cast<std::size_t>(i)] = it->second;
  }

  std::vector<RectProb> probs(keys.size());
  parallel_for(static_cast<std::ptrdiff_t>(keys.size()), threads, [&](std::ptrdiff_t u) {
    const auto& key = keys[static_cast<std::size_t>(u)];
    std::vector<Interval> limits(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) {
      limits[static_cast<std::size_t>(c)] = {key[static_cast<std::size_t>(2 * c)],
                                             key[static_cast<std::size_t>(2 * c + 1)]};
    }
    probs[static_cast<std::size_t>(u)] = mvn_rect_prob(limits, correlation, options);
  });

  FullLoglik out;
  for (Index i = 0; i < n; ++i) {
    const RectProb& p = probs[static_cast<std::size_t>(slot[static_cast<std::size_t>(i)])];
    const double v = clamp_prob(p.value);
    out.value += std::log(v);
    out.error += p.error / v;
  }
  return out;
}

FullMleResult full_mle_tiny(const MvpModel& model, const FullMleOptions& options) {
  const Index k = model.n_components();
  if (k > 3 || model.n_coef() > 2 || model.n_obs() > 2000) {
    throw InputError("full_mle_tiny is limited to K <= 3, P <= 2 and N <= 2000");
  }
  const Index n1 = model.n_theta1();
  const Index m = model.n_pairs();
  const Index dim = n1 + m;
  const double nn = static_cast<double>(model.n_obs());

  RectOptions rect;
  rect.fixed_points = true;
  rect.min_points = 1 << 11;

  auto unpack = [&](const Vector& x, Vector& theta1, Matrix& corr) {
    theta1 = x.head(n1);
    corr = Matrix::Identity(k, k);
    for (Index p = 0; p < m; ++p) {
      const auto [i, j] = pair_at(p, k);
      corr(i, j) = corr(j, i) = std::tanh(x[n1 + p]);
    }
  };
  // Negative mean log-likelihood; +inf outside the positive definite set.
  auto objective = [&](const Vector& x) -> double {
    Vector theta1;
    Matrix corr;
    unpack(x, theta1, corr);
    if (Eigen::LLT<Matrix>(corr).info() != Eigen::Success) {
      return std::numeric_limits<double>::infinity();
    }
    try {
      return -full_loglik(theta1, corr, model, rect, options.threads).value / nn;
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  auto gradient = [&](const Vector& x) {
    Vector g(dim);
    for (Index i = 0; i < dim; ++i) {
      const double h = options.diff_step * (1.0 + std::abs(x[i]));
      Vector xp = x;
      Vector xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (objective(xp) - objective(xm)) / (2.0 * h);
    }
    return g;
  };

  FullMleResult out;
  Vector x = Vector::Zero(dim);
  double f = objective(x);
  Vector g = gradient(x);
  Matrix hinv = Matrix::Identity(dim, dim);
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it;
    if (!g.allFinite()) {
      break;
    }
    if (g.cwiseAbs().maxCoeff() <= options.gradient_tol) {
      out.converged = true;
      break;
    }
    Vector d = -hinv * g;
    if (g.dot(d) >= 0.0) {
      hinv.setIdentity();
      d = -g;
    }
    double t = 1.0;
    Vector x_new;
    double f_new = INFINITY;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      x_new = x + t * d;
      f_new = objective(x_new);
      if (f_new <= f + 1e-4 * t * g.dot(d)) {
        moved = true;
        break;
      }
    }
    if (!moved) {
      break;
    }
    const Vector g_new = gradient(x_new);
    const Vector s = x_new - x;
    const Vector yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(dim, dim);
      hinv = (eye - rho * s * yv.transpose()) * hinv * (eye - rho * yv * s.transpose()) +
             rho * s * s.transpose();
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }
  if (!out.converged && g.allFinite() && g.cwiseAbs().maxCoeff() <= options.gradient_tol) {
    out.converged = true;
  }
  unpack(x, out.theta1, out.correlation);
  out.loglik = -f * nn;
  return out;
}

}  // namespace mvpcl
