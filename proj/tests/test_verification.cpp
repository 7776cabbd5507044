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

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "mvpcl/estimator.hpp"
#include "mvpcl/numerics.hpp"
#include "mvpcl/stage2.hpp"
#include "mvpcl/verification.hpp"
#include "reference_values.hpp"
#include "support.hpp"

using namespace mvpcl;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RectProb rect(const std::vector<Interval>& limits, const Matrix& sigma, RectOptions o = {}) {
  return mvn_rect_prob(limits, sigma, o);
}

Matrix corr3(double r12, double r13, double r23) {
  Matrix c(3, 3);
  c << 1, r12, r13, r12, 1, r23, r13, r23, 1;
  return c;
}

}  // namespace

TEST_SUITE("verification") {

TEST_CASE("one and two dimensions are exact") {
  Matrix s1(1, 1);
  s1 << 4.0;
  CHECK(rect({{-1.0, 3.0}}, s1).value ==
        doctest::Approx(norm_cdf(1.5) - norm_cdf(-0.5)).epsilon(1e-15));
  CHECK(rect({{8.0, kInf}}, s1).value == doctest::Approx(norm_cdf(-4.0)).epsilon(1e-14));

  const Matrix c = exchangeable_correlation(2, -0.35);
  const double a1 = -0.4, b1 = 1.1, a2 = -2.0, b2 = 0.3;
  const double exact = bvn_cdf(b1, b2, -0.35) - bvn_cdf(a1, b2, -0.35) - bvn_cdf(b1, a2, -0.35) +
                       bvn_cdf(a1, a2, -0.35);
  CHECK(rect({{a1, b1}, {a2, b2}}, c).value == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("lattice rule matches bivariate compositions to 1e-6") {
  RngStream rng(61, 0);
  RectOptions o;
  o.force_qmc = true;
  for (int i = 0; i < 25; ++i) {
    const double r = 1.8 * rng.uniform() - 0.9;
    const double a = rng.normal(), b = rng.normal();
    const double lo1 = std::min(a, b) - 0.5, hi1 = std::max(a, b);
    const double up2 = 1.5 * rng.normal();
    const RectProb qmc = rect({{lo1, hi1}, {-kInf, up2}}, exchangeable_correlation(2, r), o);
    const double exact = bvn_cdf(hi1, up2, r) - bvn_cdf(lo1, up2, r);
    CAPTURE(r);
    CHECK(std::abs(qmc.value - exact) < 1e-6);
    CHECK(qmc.error <= 1e-6);
  }
}

TEST_CASE("trivariate probabilities match frozen high-precision values") {
  for (const auto& c : testing::kTvnReference) {
    const Matrix s = corr3(c.corr[0], c.corr[1], c.corr[2]);
    const RectProb p =
        rect({{-kInf, c.upper[0]}, {-kInf, c.upper[1]}, {-kInf, c.upper[2]}}, s);
    CHECK(std::abs(p.value - c.value) < 1e-6);
    CHECK(p.error <= 1e-6);
  }
}

TEST_CASE("orthant probabilities with closed forms") {
  // K = 3: 1/8 + (asin r12 + asin r13 + asin r23) / (4 pi)
  for (const auto& r : {std::array{0.3, 0.3, 0.3}, std::array{0.6, -0.2, 0.4},
                        std::array{-0.4, -0.3, -0.2}}) {
    const double exact =
        0.125 + (std::asin(r[0]) + std::asin(r[1]) + std::asin(r[2])) / (4.0 * std::numbers::pi);
    const RectProb p = rect({{-kInf, 0}, {-kInf, 0}, {-kInf, 0}}, corr3(r[0], r[1], r[2]));
    CHECK(std::abs(p.value - exact) < 1e-6);
  }
  // Equicorrelation 1/2: every ordering of the K + 1 exchangeable
  // variables is equally likely, so P = 1 / (K + 1).
  for (Index k = 4; k <= 6; ++k) {
    const std::vector<Interval> lim(static_cast<std::size_t>(k), Interval{-kInf, 0.0});
    const RectProb p = rect(lim, exchangeable_correlation(k, 0.5));
    CAPTURE(k);
    CHECK(std::abs(p.value - 1.0 / static_cast<double>(k + 1)) < 1e-6);
  }
}

TEST_CASE("marginalizing over an unbounded variable drops it") {
  RngStream rng(62, 0);
  for (int i = 0; i < 5; ++i) {
    const Index k = 4;
    const Matrix c = testing::random_correlation(k, rng);
    std::vector<Interval> lim;
    for (Index j = 0; j < k; ++j) {
      const double a = rng.normal();
      lim.push_back({a - 1.0, a + 0.8});
    }
    std::vector<Interval> full = lim;
    full[2] = {-kInf, kInf};
    std::vector<Interval> dropped = {lim[0], lim[1], lim[3]};
    std::vector<Index> keep{0, 1, 3};
    const Matrix c3 = c(keep, keep);
    CHECK(std::abs(rect(full, c).value - rect(dropped, c3).value) < 2e-6);
  }
}

TEST_CASE("splitting an interval adds up") {
  RngStream rng(63, 0);
  for (int i = 0; i < 5; ++i) {
    const Matrix c = testing::random_correlation(3, rng);
    const double cut = 0.5 * rng.normal();
    const std::vector<Interval> whole{{-1.0, 1.5}, {-kInf, 0.7}, {-0.5, kInf}};
    std::vector<Interval> left = whole, right = whole;
    left[0].upper = cut;
    right[0].lower = cut;
    const double sum = rect(left, c).value + rect(right, c).value;
    CHECK(std::abs(sum - rect(whole, c).value) < 3e-6);
  }
}

TEST_CASE("rectangle probabilities are deterministic and scale-invariant") {
  const Matrix c = corr3(0.2, 0.5, -0.1);
  const std::vector<Interval> lim{{-1, 1}, {-0.5, 2}, {-kInf, 0.3}};
  const RectProb a = rect(lim, c);
  const RectProb b = rect(lim, c);
  CHECK(a.value == b.value);
  const Vector sd = (Vector(3) << 2.0, 0.5, 3.0).finished();
  const Matrix cov = sd.asDiagonal() * c * sd.asDiagonal();
  std::vector<Interval> scaled = lim;
  for (std::size_t j = 0; j < 3; ++j) {
    scaled[j].lower *= sd[static_cast<Index>(j)];
    scaled[j].upper *= sd[static_cast<Index>(j)];
  }
  CHECK(std::abs(rect(scaled, cov).value - a.value) < 2e-6);
  // Reflecting a variable maps (a, b) to (-b, -a) and negates its correlations.
  Matrix flipped = c;
  flipped.row(1) *= -1.0;
  flipped.col(1) *= -1.0;
  std::vector<Interval> lim_flip = lim;
  lim_flip[1] = {-2, 0.5};
  CHECK(std::abs(rect(lim_flip, flipped).value - a.value) < 2e-6);
}

TEST_CASE("rectangle input validation") {
  CHECK_THROWS_AS(rect({}, Matrix(0, 0)), InputError);
  const std::vector<Interval> seven(7, Interval{-kInf, 0.0});
  CHECK_THROWS_AS(rect(seven, Matrix::Identity(7, 7)), InputError);
  CHECK_THROWS_AS(rect({{1.0, 0.0}}, Matrix::Identity(1, 1)), InputError);
  CHECK_THROWS_AS(rect({{0, 1}, {0, 1}, {0, 1}}, corr3(0.9, 0.9, -0.9)), NumericError);
}

TEST_CASE("simulated responses follow the model") {
  const Index n = 40000;
  const Matrix c = corr3(0.5, -0.3, 0.2);
  Matrix eta(n, 3);
  eta.col(0).setConstant(0.3);
  eta.col(1).setConstant(-0.6);
  eta.col(2).setConstant(1.0);
  const BinaryMatrix y = simulate_y(eta, c, 71, 2);
  for (Index k = 0; k < 3; ++k) {
    const double freq = y.col(k).cast<double>().mean();
    CHECK(std::abs(freq - norm_cdf(eta(0, k))) < 0.01);
  }
  const double both01 = (y.col(0).array() * y.col(1).array()).cast<double>().mean();
  CHECK(std::abs(both01 - bvn_cdf(0.3, -0.6, 0.5)) < 0.01);
  const double both02 = (y.col(0).array() * y.col(2).array()).cast<double>().mean();
  CHECK(std::abs(both02 - bvn_cdf(0.3, 1.0, -0.3)) < 0.01);

  CHECK(simulate_y(eta.topRows(100), c, 71, 2) == y.topRows(100));
  CHECK(simulate_y(eta.topRows(100), c, 71, 3) != y.topRows(100));
  CHECK_THROWS_AS(simulate_y(eta, corr3(0.9, 0.9, -0.9), 1), InputError);
  CHECK_THROWS_AS(simulate_y(eta, Matrix::Identity(2, 2), 1), InputError);
  Matrix asym = c;
  asym(0, 1) = 0.4;
  CHECK_THROWS_AS(simulate_y(eta, asym, 1), InputError);
}

TEST_CASE("full log-likelihood for K = 2 is the exact bivariate sum") {
  const MvpModel model = testing::design_model(400, 2, 3, 0.4, 72);
  const FitResult r = fit(model, {});
  const FullLoglik full = full_loglik(r.theta1, r.correlation, model);
  const Matrix eta = model.linear_predictors(r.theta1);
  double exact = 0.0;
  for (Index i = 0; i < model.n_obs(); ++i) {
    exact += std::log(pair_cell_prob(model.y()(i, 0), model.y()(i, 1), eta(i, 0), eta(i, 1),
                                     r.correlation(0, 1)));
  }
  CHECK(full.value == doctest::Approx(exact).epsilon(1e-12));
  // The bivariate full likelihood is the single pair term.
  CHECK(full.value == doctest::Approx(r.stage2_loglik).epsilon(1e-10));
}

TEST_CASE("full log-likelihood for K = 3 sums rectangle log-probabilities") {
  const MvpModel model = testing::design_model(60, 3, 2, 0.3, 73);
  const FitResult r = fit(model, {});
  const FullLoglik full = full_loglik(r.theta1, r.correlation, model, {}, 2);
  const Matrix eta = model.linear_predictors(r.theta1);
  double sum = 0.0;
  for (Index i = 0; i < model.n_obs(); ++i) {
    std::vector<Interval> lim;
    for (Index k = 0; k < 3; ++k) {
      lim.push_back(model.y()(i, k) != 0 ? Interval{-kInf, eta(i, k)} : Interval{eta(i, k), kInf});
    }
    sum += std::log(rect(lim, r.correlation).value);
  }
  CHECK(std::abs(full.value - sum) < 1e-9);
  CHECK(full.error > 0.0);
  CHECK(full.error < 1e-3);
}

TEST_CASE("full MLE on a tiny problem") {
  const MvpModel model = testing::design_model(500, 2, 2, 0.5, 74);
  FullMleOptions o;
  const FullMleResult mle = full_mle_tiny(model, o);
  CHECK(mle.converged);
  const FitResult two = fit(model, {});
  // For K = 2 the full likelihood is the pairwise one, so the optimum can
  // only improve on the two-stage plug-in.
  CHECK(mle.loglik >= two.stage2_loglik - 1e-6);
  CHECK((mle.theta1 - two.theta1).cwiseAbs().maxCoeff() < 0.05);
  CHECK(std::abs(mle.correlation(0, 1) - two.correlation(0, 1)) < 0.05);

  CHECK_THROWS_AS(full_mle_tiny(testing::design_model(100, 4, 2, 0.2, 75)), InputError);
  CHECK_THROWS_AS(full_mle_tiny(testing::design_model(100, 2, 3, 0.2, 75)), InputError);
}

}  // TEST_SUITE
