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

#include <doctest.h>

#include "mvpcl/estimator.hpp"
#include "support.hpp"

using namespace mvpcl;

TEST_SUITE("estimator") {

TEST_CASE("fit assembles stage results in parameter order") {
  const MvpModel model = testing::design_model(1200, 3, 3, 0.4, 31);
  const FitResult r = fit(model, {});
  REQUIRE(r.theta().size() == model.n_params());
  for (Index k = 0; k < 3; ++k) {
    CHECK(r.coefficients.col(k) == r.stage1[static_cast<std::size_t>(k)].beta);
    CHECK(r.theta1.segment(3 * k, 3) == r.coefficients.col(k));
  }
  CHECK(r.correlation.diagonal() == Vector::Ones(3));
  CHECK(r.correlation(0, 2) == r.stage2[1].rho);
  CHECK(r.correlation(2, 0) == r.stage2[1].rho);
  CHECK(r.stage2[2].j == 1);
  CHECK(r.stage2[2].k == 2);
  CHECK(r.robust_cov.rows() == model.n_params());
  CHECK(r.min_eigenvalue > 0.0);

  const CompositeLoglik cl = composite_loglik(r.theta1, r.correlation, model);
  CHECK(cl.stage1_total == doctest::Approx(r.stage1_loglik).epsilon(1e-12));
  CHECK(cl.stage2_total == doctest::Approx(r.stage2_loglik).epsilon(1e-12));
}

TEST_CASE("results do not depend on the thread count") {
  const MvpModel model = testing::design_model(900, 4, 3, 0.3, 32);
  FitOptions one;
  one.threads = 1;
  FitOptions many;
  many.threads = 4;
  const FitResult a = fit(model, one);
  const FitResult b = fit(model, many);
  CHECK(a.theta() == b.theta());
  CHECK(a.robust_cov == b.robust_cov);
}

TEST_CASE("permuting components permutes the estimates") {
  const MvpModel model = testing::design_model(1000, 3, 3, 0.35, 33);
  const std::vector<Index> perm{2, 0, 1};
  BinaryMatrix y(model.n_obs(), 3);
  for (Index k = 0; k < 3; ++k) {
    y.col(k) = model.y().col(perm[static_cast<std::size_t>(k)]);
  }
  const FitResult base = fit(model, {});
  const FitResult p = fit(MvpModel(model.x(), y), {});
  for (Index a = 0; a < 3; ++a) {
    const Index pa = perm[static_cast<std::size_t>(a)];
    CHECK((p.coefficients.col(a) - base.coefficients.col(pa)).cwiseAbs().maxCoeff() < 1e-12);
    for (Index b = 0; b < 3; ++b) {
      const Index pb = perm[static_cast<std::size_t>(b)];
      CHECK(p.correlation(a, b) == doctest::Approx(base.correlation(pa, pb)).epsilon(1e-9));
    }
  }
  // Standard errors follow the same permutation.
  const Vector se = base.robust_se();
  const Vector sp = p.robust_se();
  for (Index a = 0; a < 3; ++a) {
    const Index pa = perm[static_cast<std::size_t>(a)];
    for (Index j = 0; j < 3; ++j) {
      CHECK(sp[3 * a + j] == doctest::Approx(se[3 * pa + j]).epsilon(1e-7));
    }
  }
}

TEST_CASE("flipping a response negates its coefficients and correlations") {
  const MvpModel model = testing::design_model(1000, 3, 3, 0.35, 34);
  BinaryMatrix y = model.y();
  y.col(1) = (1 - y.col(1).array()).matrix();
  const FitResult base = fit(model, {});
  const FitResult f = fit(MvpModel(model.x(), y), {});
  CHECK((f.coefficients.col(1) + base.coefficients.col(1)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((f.coefficients.col(0) - base.coefficients.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.correlation(0, 1) == doctest::Approx(-base.correlation(0, 1)).epsilon(1e-8));
  CHECK(f.correlation(1, 2) == doctest::Approx(-base.correlation(1, 2)).epsilon(1e-8));
  CHECK(f.correlation(0, 2) == doctest::Approx(base.correlation(0, 2)).epsilon(1e-10));
  CHECK((f.robust_se() - base.robust_se()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("single-class responses are reported by name") {
  MvpModel model = testing::design_model(200, 3, 2, 0.2, 35);
  BinaryMatrix y = model.y();
  y.col(2).setZero();
  MvpModel bad(model.x(), y);
  bad.set_names({"c0", "c1"}, {"a", "b", "c"});
  try {
    (void)fit(bad, {});
    FAIL("expected EstimationError");
  } catch (const EstimationError& e) {
    CHECK(e.stage() == "stage1");
    CHECK(e.where() == "c");
  }
}

TEST_CASE("compute_variance=false skips the covariance") {
  const MvpModel model = testing::design_model(300, 2, 2, 0.2, 36);
  FitOptions o;
  o.compute_variance = false;
  const FitResult r = fit(model, o);
  CHECK(r.robust_cov.size() == 0);
  CHECK(r.robust_se().size() == 0);
}

TEST_CASE("inverse_spd") {
  Matrix a(3, 3);
  a << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  const Matrix inv = inverse_spd(a, "A");
  CHECK((inv * a - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  Matrix singular = a;
  singular.col(2) = singular.col(1);
  singular.row(2) = singular.row(1);
  CHECK_THROWS_AS(inverse_spd(singular, "S"), NumericError);
  Matrix bad = a;
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(inverse_spd(bad, "B"), NumericError);
}

TEST_CASE("nearest_correlation") {
  SUBCASE("leaves a valid correlation matrix alone") {
    const Matrix c = exchangeable_correlation(4, 0.3);
    CHECK((nearest_correlation(c) - c).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("repairs an indefinite pairwise estimate") {
    Matrix c(3, 3);
    c << 1, 1, 0, 1, 1, 1, 0, 1, 1;
    const Matrix r = nearest_correlation(c, 1e-8);
    CHECK((r.diagonal() - Vector::Ones(3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(r).eigenvalues().minCoeff() > 0.0);
    // Known nearest correlation matrix for this input.
    CHECK(r(0, 1) == doctest::Approx(0.7607).epsilon(2e-4));
    CHECK(r(0, 2) == doctest::Approx(0.1573).epsilon(2e-3));
    CHECK(r(1, 2) == doctest::Approx(0.7607).epsilon(2e-4));
  }
}

}  // TEST_SUITE
