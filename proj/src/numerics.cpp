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

#include "mvpcl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace mvpcl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ratio of two polynomials with coefficients in increasing order.
double rational(const double* num, const double* den, int n, double x) {
  double p = num[n - 1];
  double q = den[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    p = p * x + num[i];
    q = q * x + den[i];
  }
  return p / q;
}

// Wichura, AS 241 (PPND16).
double quantile_as241(double p) {
  static constexpr double a[8] = {
      3.387132872796366608,   133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125,  45921.953931549871457, 67265.770927008700853,
      33430.575583588128105,  2509.0809287301226727};
  static constexpr double b[8] = {
      1.0,                    42.313330701600911252, 687.1870074920579083,
      5394.1960214247511077,  21213.794301586595867, 39307.89580009271061,
      28729.085735721942674,  5226.495278852854561};
  static constexpr double c[8] = {
      1.42343711074968357734,    4.6303378461565452959,
      5.7694972214606914055,     3.64784832476320460504,
      1.27045825245236838258,    0.24178072517745061177,
      0.0227238449892691845833,  7.7454501427834140764e-4};
  static constexpr double d[8] = {
      1.0,                       2.05319162663775882187,
      1.6763848301838038494,     0.68976733498510000455,
      0.14810397642748007459,    0.0151986665636164571966,
      5.475938084995344946e-4,   1.05075007164441684324e-9};
  static constexpr double e[8] = {
      6.6579046435011037772,     5.4637849111641143699,
      1.7848265399172913358,     0.29656057182850489123,
      0.026532189526576123093,   0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {
      1.0,                       0.59983220655588793769,
      0.13692988092273580531,    0.0148753612908506148525,
      7.868691311456132591e-4,   1.8463183175100546818e-5,
      1.4215117583164458887e-7,  2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * rational(a, b, 8, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x = r <= 5.0 ? rational(c, d, 8, r - 1.6) : rational(e, f, 8, r - 5.0);
  return q < 0.0 ? -x : x;
}

// Positive abscissae of the n-point Gauss-Legendre rule.
template <unsigned N>
const std::vector<double>& rule_abscissa() {
  static const std::vector<double> data = [] {
    const auto& src = boost::math::quadrature::gauss<double, N>::abscissa();
    return std::vector<double>(src.begin(), src.end());
  }();
  return data;
}

template <unsigned N>
const std::vector<double>& rule_weight() {
  static const std::vector<double> data = [] {
    const auto& src = boost::math::quadrature::gauss<double, N>::weights();
    return std::vector<double>(src.begin(), src.end());
  }();
  return data;
}

// Upper-orthant probability P(X > sh, Y > sk), finite sh and sk.
// Drezner & Wesolowsky (1989) with the double-precision refinements of
// Genz (2004).
double bvn_upper(double sh, double sk, double r) {
  const auto rule = detail::bvn_rule(std::abs(r));
  const std::size_t lg = rule.abscissa.size();
  double h = sh;
  double k = sk;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < lg; ++i) {
      const double x = rule.abscissa[i];
      const double w = rule.weight[i];
      double sn = std::sin(asr * (1.0 - x) / 2.0);
      bvn += w * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 + x) / 2.0);
      bvn += w * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * kSqrt2Pi * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < lg; ++i) {
      // Genz tabulates the negative abscissae.
      const double x = -rule.abscissa[i];
      const double w = rule.weight[i];
      double xs = (a * (x + 1.0)) * (a * (x + 1.0));
      double rs = std::sqrt(1.0 - xs);
      bvn += a * w *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (1.0 - x) * (1.0 - x) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * w * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
              (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    bvn += norm_cdf(-std::max(h, k));
  } else {
    bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
  }
  return bvn;
}

}  // namespace

namespace detail {

GaussRule bvn_rule(double abs_rho) noexcept {
  if (abs_rho < 0.3) {
    return {rule_abscissa<6>(), rule_weight<6>()};
  }
  if (abs_rho < 0.75) {
    return {rule_abscissa<12>(), rule_weight<12>()};
  }
  return {rule_abscissa<20>(), rule_weight<20>()};
}

}  // namespace detail

double norm_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0, 1), got " +
                            std::to_string(p));
  }
  return quantile_as241(p);
}

double clamp_prob(double p) noexcept { return std::clamp(p, kMinProb, 1.0); }

double log_norm_cdf(double x) noexcept { return std::log(clamp_prob(norm_cdf(x))); }

// Cody (1969) rational approximations for exp(x^2) erfc(x).
double erfcx(double x) noexcept {
  static constexpr double a[5] = {3.1611237438705656, 113.864154151050156,
                                  377.485237685302021, 3209.37758913846947,
                                  .185777706184603153};
  static constexpr double b[4] = {23.6012909523441209, 244.024637934444173,
                                  1282.61652607737228, 2844.23683343917062};
  static constexpr double c[9] = {.564188496988670089, 8.88314979438837594,
                                  66.1191906371416295, 298.635138197400131,
                                  881.95222124176909,  1712.04761263407058,
                                  2051.07837782607147, 1230.33935479799725,
                                  2.15311535474403846e-8};
  static constexpr double d[8] = {15.7449261107098347, 117.693950891312499,
                                  537.181101862009858, 1621.38957456669019,
                                  3290.79923573345963, 4362.61909014324716,
                                  3439.36767414372164, 1230.33935480374942};
  static constexpr double p[6] = {.305326634961232344, .360344899949804439,
                                  .125781726111229246, .0160837851487422766,
                                  6.58749161529837803e-4, .0163153871373020978};
  static constexpr double q[5] = {2.56852019228982242, 1.87295284992346047,
                                  .527905102951428412, .0605183413124413191,
                                  .00233520497626869185};
  constexpr double kInvSqrtPi = 0.56418958354775628695;

  const double y = std::abs(x);
  if (y <= 0.46875) {
    const double ysq = y * y;
    double num = a[4] * ysq;
    double den = ysq;
    for (int i = 0; i < 3; ++i) {
      num = (num + a[i]) * ysq;
      den = (den + b[i]) * ysq;
    }
    const double erf = x * (num + a[3]) / (den + b[3]);
    return std::exp(ysq) * (1.0 - erf);
  }
  double result;
  if (y <= 4.0) {
    double num = c[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + c[i]) * y;
      den = (den + d[i]) * y;
    }
    result = (num + c[7]) / (den + d[7]);
  } else if (y >= 6.71e7) {
    result = kInvSqrtPi / y;
  } else {
    const double ysq = 1.0 / (y * y);
    double num = p[5] * ysq;
    double den = ysq;
    for (int i = 0; i < 4; ++i) {
      num = (num + p[i]) * ysq;
      den = (den + q[i]) * ysq;
    }
    result = ysq * (num + p[4]) / (den + q[4]);
    result = (kInvSqrtPi - result) / y;
  }
  if (x < 0.0) {
    // Only reached for x < -0.46875; erfcx grows like 2 exp(x^2).
    result = 2.0 * std::exp(y * y) - result;
  }
  return result;
}

double mills_ratio(double x) noexcept {
  if (x >= 0.0) {
    return norm_pdf(x) / norm_cdf(x);
  }
  // phi(x) / Phi(x) = sqrt(2/pi) / erfcx(-x / sqrt 2)
  return 2.0 * kInvSqrt2Pi / erfcx(-x / std::numbers::sqrt2);
}

double bvn_cdf(double h, double k, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw std::domain_error("bvn_cdf: rho must lie in [-1, 1], got " +
                            std::to_string(rho));
  }
  if (std::isnan(h) || std::isnan(k)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (h == -INFINITY || k == -INFINITY) {
    return 0.0;
  }
  if (h == INFINITY) {
    return norm_cdf(k);
  }
  if (k == INFINITY) {
    return norm_cdf(h);
  }
  if (rho == 1.0) {
    return norm_cdf(std::min(h, k));
  }
  if (rho == -1.0) {
    return std::max(0.0, norm_cdf(h) + norm_cdf(k) - 1.0);
  }
  return std::clamp(bvn_upper(-h, -k, rho), 0.0, 1.0);
}

double bvn_cdf(const BvnArgs& args) { return bvn_cdf(args.h, args.k, args.rho); }

double bvn_pdf(double h, double k, double rho) noexcept {
  const double s = 1.0 - rho * rho;
  const double q = (h * h - 2.0 * rho * h * k + k * k) / s;
  return std::exp(-0.5 * q) / (kTwoPi * std::sqrt(s));
}

}  // namespace mvpcl
