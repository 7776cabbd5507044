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

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "mvpcl/numerics.hpp"
#include "mvpcl/rng.hpp"
#include "reference_values.hpp"

namespace {

using namespace mvpcl;

// Independent bivariate oracle: integrate the density in rho from the
// independent case (adaptive Gauss-Kronrod, split at rho / 2).
double bvn_by_quadrature(double h, double k, double rho) {
  const auto density = [&](double r) {
    const double d = 1.0 - r * r;
    return std::exp(-(h * h - 2.0 * r * h * k + k * k) / (2.0 * d)) /
           (2.0 * std::numbers::pi * std::sqrt(d));
  };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double base = norm_cdf(h) * norm_cdf(k);
  return base + Rule::integrate(density, 0.0, rho / 2, 15, 1e-15) +
         Rule::integrate(density, rho / 2, rho, 15, 1e-15);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("norm_cdf agrees with erfc and handles infinities") {
  for (double x = -38.0; x <= 9.0; x += 0.37) {
    const double expected = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    CHECK(norm_cdf(x) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(norm_cdf(-INFINITY) == 0.0);
  CHECK(norm_cdf(INFINITY) == 1.0);
  CHECK(norm_pdf(0.0) == doctest::Approx(kInvSqrt2Pi).epsilon(1e-15));
}

TEST_CASE("norm_quantile inverts norm_cdf") {
  const boost::math::normal reference;
  for (double p : {1e-300, 1e-100, 1e-20, 1e-8, 0.001, 0.025, 0.3, 0.5, 0.7, 0.975, 0.999999}) {
    const double q = norm_quantile(p);
    CHECK(q == doctest::Approx(boost::math::quantile(reference, p)).epsilon(1e-13));
    CHECK(norm_cdf(q) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(NAN), std::domain_error);
}

TEST_CASE("log_norm_cdf and mills_ratio deep in the tail") {
  struct Row {
    double x, log_cdf, mills;
  };
  // 40-digit reference values.
  // Probabilities are floored at kMinProb before the log.
  CHECK(log_norm_cdf(-40.0) == doctest::Approx(std::log(kMinProb)).epsilon(1e-15));
  CHECK(mills_ratio(-40.0) == doctest::Approx(40.024968847207263723).epsilon(1e-13));
  const Row rows[] = {
      {-10.0, -53.231285150512470578, 10.098093233962511963},
      {-3.0, -6.6077262215103495433, 3.2830986549304365069},
      {0.0, -0.69314718055994530942, 0.79788456080286535588},
      {5.0, -2.8665161296376359338e-7, 1.4867199409049057124e-6},
  };
  for (const Row& r : rows) {
    CAPTURE(r.x);
    CHECK(log_norm_cdf(r.x) == doctest::Approx(r.log_cdf).epsilon(1e-13));
    CHECK(mills_ratio(r.x) == doctest::Approx(r.mills).epsilon(1e-13));
  }
  CHECK(std::isfinite(mills_ratio(-1e6)));
  CHECK(mills_ratio(-1e6) == doctest::Approx(1e6).epsilon(1e-9));
}

TEST_CASE("erfcx reference values") {
  CHECK(erfcx(0.0) == 1.0);
  CHECK(erfcx(0.5) == doctest::Approx(0.61569034419292587487).epsilon(1e-14));
  CHECK(erfcx(5.0) == doctest::Approx(0.11070463773306862637).epsilon(1e-14));
  CHECK(erfcx(30.0) == doctest::Approx(0.018795888861416751497).epsilon(1e-14));
  CHECK(erfcx(1e4) == doctest::Approx(5.6418958072680841152e-5).epsilon(1e-14));
}

TEST_CASE("bvn_cdf matches frozen high-precision values") {
  for (const auto& c : testing::kBvnReference) {
    CAPTURE(c.h);
    CAPTURE(c.k);
    CAPTURE(c.rho);
    const double got = bvn_cdf(c.h, c.k, c.rho);
    CHECK(std::abs(got - c.value) <= 2e-15 + 1e-12 * c.value);
  }
}

TEST_CASE("bvn_cdf matches the density-integral oracle on random arguments") {
  RngStream rng(2024, 0);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double h = 3.0 * rng.normal();
    const double k = 3.0 * rng.normal();
    const double rho = 1.98 * rng.uniform() - 0.99;
    worst = std::max(worst, std::abs(bvn_cdf(h, k, rho) - bvn_by_quadrature(h, k, rho)));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("Sheppard orthant identity") {
  for (double rho = -0.999; rho <= 0.999; rho += 0.0185) {
    const double expected = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
    CHECK(bvn_cdf(0.0, 0.0, rho) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("bvn_cdf symmetries and margins") {
  RngStream rng(7, 3);
  for (int i = 0; i < 200; ++i) {
    const double h = 2.5 * rng.normal();
    const double k = 2.5 * rng.normal();
    const double rho = 1.99 * rng.uniform() - 0.995;
    CHECK(bvn_cdf(h, k, rho) == doctest::Approx(bvn_cdf(k, h, rho)).epsilon(1e-14));
    // P(Z1 <= h, Z2 <= k) + P(Z1 <= h, Z2 > k) = Phi(h)
    CHECK(bvn_cdf(h, k, rho) + bvn_cdf(h, -k, -rho) == doctest::Approx(norm_cdf(h)).epsilon(1e-13));
    // the four cells sum to one
    const double cells = bvn_cdf(h, k, rho) + bvn_cdf(h, -k, -rho) + bvn_cdf(-h, k, -rho) +
                         bvn_cdf(-h, -k, rho);
    CHECK(cells == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("bvn_cdf limits and domain") {
  CHECK(bvn_cdf(0.7, INFINITY, 0.3) == doctest::Approx(norm_cdf(0.7)).epsilon(1e-15));
  CHECK(bvn_cdf(-INFINITY, 0.2, 0.3) == 0.0);
  CHECK(bvn_cdf(0.4, -0.1, 0.0) == doctest::Approx(norm_cdf(0.4) * norm_cdf(-0.1)).epsilon(1e-15));
  CHECK(bvn_cdf(0.4, -0.1, 1.0) == doctest::Approx(norm_cdf(-0.1)).epsilon(1e-15));
  CHECK(bvn_cdf(0.4, -0.1, -1.0) == doctest::Approx(norm_cdf(0.4) - norm_cdf(0.1)).epsilon(1e-14));
  CHECK(bvn_cdf(0.4, -0.6, -1.0) == 0.0);
  // continuous at the degenerate ends
  CHECK(bvn_cdf(0.4, -0.1, 1.0 - 1e-12) == doctest::Approx(bvn_cdf(0.4, -0.1, 1.0)).epsilon(1e-5));
  CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, NAN), std::domain_error);
}

TEST_CASE("bvn_pdf is the rho-derivative of bvn_cdf") {
  RngStream rng(11, 0);
  for (int i = 0; i < 50; ++i) {
    const double h = 2.0 * rng.normal();
    const double k = 2.0 * rng.normal();
    const double rho = 1.8 * rng.uniform() - 0.9;
    const double step = 1e-5;
    const double fd = (bvn_cdf(h, k, rho + step) - bvn_cdf(h, k, rho - step)) / (2.0 * step);
    CHECK(std::abs(bvn_pdf(h, k, rho) - fd) < 1e-9 + 1e-6 * fd);
  }
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (double r : {0.1, 0.5, 0.9}) {
    const auto rule = detail::bvn_rule(r);
    REQUIRE(rule.abscissa.size() == rule.weight.size());
    const auto n = static_cast<int>(2 * rule.abscissa.size());
    double total = 0.0;
    double even = 0.0;
    for (std::size_t i = 0; i < rule.abscissa.size(); ++i) {
      total += 2.0 * rule.weight[i];
      even += 2.0 * rule.weight[i] * std::pow(rule.abscissa[i], n - 2);
    }
    CHECK(total == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(even == doctest::Approx(2.0 / (n - 1)).epsilon(1e-14));
  }
}

}  // TEST_SUITE
