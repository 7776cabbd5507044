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
#include <cstdlib>
#include <string>
#include <vector>

#include <doctest.h>

#include "mvpcl/kernels.hpp"
#include "mvpcl/numerics.hpp"
#include "mvpcl/rng.hpp"

namespace {

using namespace mvpcl;

std::vector<double> random_values(std::size_t n, double spread, std::uint64_t stream) {
  RngStream rng(99, stream);
  std::vector<double> v(n);
  for (double& x : v) {
    x = spread * rng.normal();
  }
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  }
  return worst;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar kernels follow the reference functions") {
  const auto eta = random_values(1003, 6.0, 0);
  std::vector<double> log_cdf(eta.size()), mills(eta.size());
  kernels::scalar::probit_terms(eta.data(), log_cdf.data(), mills.data(), eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    CHECK(log_cdf[i] == log_norm_cdf(eta[i]));
    CHECK(mills[i] == mills_ratio(eta[i]));
  }
  const auto h = random_values(257, 2.0, 1);
  const auto k = random_values(257, 2.0, 2);
  std::vector<double> out(h.size());
  kernels::scalar::bvn_cdf(h.data(), k.data(), -0.45, out.data(), h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(out[i] == bvn_cdf(h[i], k[i], -0.45));
  }
}

TEST_CASE("active table honours MVPCL_SIMD") {
  const char* env = std::getenv("MVPCL_SIMD");
  const auto& active = kernels::active();
  if (env != nullptr && std::string(env) == "scalar") {
    CHECK(active.isa == kernels::Isa::kScalar);
  } else if (kernels::avx2_table() != nullptr) {
    CHECK(active.isa == kernels::Isa::kAvx2);
  }
  MESSAGE("active kernels: " << active.name);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const kernels::KernelTable* simd = kernels::avx2_table();
  if (simd == nullptr) {
    MESSAGE("AVX2 unavailable; equivalence test skipped");
    return;
  }
  const auto& ref = kernels::scalar_table();

  SUBCASE("probit_terms, including tails and odd lengths") {
    for (std::size_t n : {1u, 3u, 4u, 5u, 17u, 4099u}) {
      auto eta = random_values(n, 8.0, n);
      if (n > 10) {
        eta[0] = -38.5;
        eta[1] = 38.5;
        eta[2] = 0.0;
        eta[3] = -1e-300;
        eta[4] = -5.5;
      }
      std::vector<double> lc_ref(n), m_ref(n), lc(n), m(n);
      ref.probit_terms(eta.data(), lc_ref.data(), m_ref.data(), n);
      simd->probit_terms(eta.data(), lc.data(), m.data(), n);
      CAPTURE(n);
      CHECK(max_rel(lc, lc_ref, 1e-300) < 1e-13);
      CHECK(max_rel(m, m_ref, 1e-300) < 1e-13);
    }
  }

  SUBCASE("bvn_cdf across correlation regimes") {
    const auto h = random_values(2051, 2.5, 10);
    const auto k = random_values(2051, 2.5, 11);
    for (double rho : {-0.999, -0.93, -0.6, -0.2, 0.0, 0.1, 0.37, 0.74, 0.9, 0.99, 0.99999}) {
      std::vector<double> a(h.size()), b(h.size());
      ref.bvn_cdf(h.data(), k.data(), rho, a.data(), h.size());
      simd->bvn_cdf(h.data(), k.data(), rho, b.data(), h.size());
      double worst = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
      }
      CAPTURE(rho);
      CHECK(worst < 1e-14);
    }
  }

  SUBCASE("sum_log_clamped with zeros and tiny values") {
    auto p = random_values(1001, 1.0, 20);
    for (double& v : p) {
      v = norm_cdf(v);
    }
    p[3] = 0.0;
    p[7] = 1e-320;
    p[8] = 1.0;
    const double a = ref.sum_log_clamped(p.data(), p.size());
    const double b = simd->sum_log_clamped(p.data(), p.size());
    CHECK(b == doctest::Approx(a).epsilon(1e-13));
  }
}

#if defined(MVPCL_HAVE_AVX2)
TEST_CASE("AVX2 elementary functions") {
  if (kernels::avx2_table() == nullptr) {
    return;
  }
  const std::vector<double> x = {-745.0, -700.0, -20.5, -1.0, -1e-10, 0.0, 1e-10, 0.5, 1.0, 30.0, 700.0};
  std::vector<double> out(x.size());
  kernels::avx2::exp(x.data(), out.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CAPTURE(x[i]);
    CHECK(out[i] == doctest::Approx(std::exp(x[i])).epsilon(1e-14));
  }
  const std::vector<double> y = {1e-300, 1e-10, 0.1, 0.5, 0.999999, 1.0, 2.0, 1e10, 1e300};
  std::vector<double> out_log(y.size());
  kernels::avx2::log(y.data(), out_log.data(), y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    CAPTURE(y[i]);
    CHECK(std::abs(out_log[i] - std::log(y[i])) <= 1e-14 * std::max(1.0, std::abs(std::log(y[i]))));
  }
  const auto z = random_values(513, 4.0, 30);
  std::vector<double> cdf(z.size());
  kernels::avx2::norm_cdf(z.data(), cdf.data(), z.size());
  std::vector<double> cdf_ref(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    cdf_ref[i] = norm_cdf(z[i]);
  }
  CHECK(max_rel(cdf, cdf_ref, 1e-300) < 1e-13);
}
#endif

}  // TEST_SUITE
