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

// Univariate and bivariate standard normal kernels.

#pragma once

#include <span>

namespace mvpcl {

/// Probabilities are clamped to [kMinProb, 1] before logs are taken.
inline constexpr double kMinProb = 1e-300;

inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677940;

double norm_pdf(double x) noexcept;

/// Standard normal CDF; accepts +-infinity.
double norm_cdf(double x) noexcept;

/// Inverse of norm_cdf on (0, 1). Throws std::domain_error otherwise.
double norm_quantile(double p);

/// ln(max(Phi(x), kMinProb)).
double log_norm_cdf(double x) noexcept;

/// Inverse Mills ratio phi(x) / Phi(x), stable for large negative x.
double mills_ratio(double x) noexcept;

/// Scaled complementary error function exp(x^2) erfc(x), x >= 0.
double erfcx(double x) noexcept;

double clamp_prob(double p) noexcept;

struct BvnArgs {
  double h;
  double k;
  double rho;
};

/// P(Z1 <= h, Z2 <= k) for a standard bivariate normal with correlation rho.
/// h and k may be infinite. |rho| = 1 is the degenerate limit. Throws
/// std::domain_error when rho is outside [-1, 1].
double bvn_cdf(double h, double k, double rho);
double bvn_cdf(const BvnArgs& args);

/// Bivariate normal density phi2(h, k; rho) for |rho| < 1.
double bvn_pdf(double h, double k, double rho) noexcept;

namespace detail {

/// Gauss-Legendre rule used by the bivariate integral: positive abscissae
/// and their weights on [-1, 1].
struct GaussRule {
  std::span<const double> abscissa;
  std::span<const double> weight;
};

/// Rule selected by |rho|: 6, 12 or 20 points.
GaussRule bvn_rule(double abs_rho) noexcept;

}  // namespace detail
}  // namespace mvpcl
