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

// Batched per-observation kernels used by the likelihood inner loops.
//
// Every kernel exists as a scalar reference (a loop over the functions in
// numerics.hpp) and, on x86-64, as an AVX2+FMA variant. The variant is
// picked once at first use from CPUID; setting MVPCL_SIMD=scalar in the
// environment forces the reference path. The two variants agree to a few
// ulps, not bitwise.

#pragma once

#include <cstddef>
#include <span>

namespace mvpcl::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  // log_cdf[i] = ln(max(Phi(eta[i]), 1e-300)); mills[i] = phi(eta[i]) / Phi(eta[i]).
  void (*probit_terms)(const double* eta, double* log_cdf, double* mills, std::size_t n);

  // out[i] = P(Z1 <= h[i], Z2 <= k[i]; rho) for finite h, k and |rho| < 1.
  void (*bvn_cdf)(const double* h, const double* k, double rho, double* out, std::size_t n);

  // sum_i ln(max(p[i], 1e-300)).
  double (*sum_log_clamped)(const double* p, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;

// Convenience wrappers over active().
void probit_terms(std::span<const double> eta, std::span<double> log_cdf,
                  std::span<double> mills);
void bvn_cdf(std::span<const double> h, std::span<const double> k, double rho,
             std::span<double> out);
double sum_log_clamped(std::span<const double> p);

namespace scalar {
void probit_terms(const double* eta, double* log_cdf, double* mills, std::size_t n);
void bvn_cdf(const double* h, const double* k, double rho, double* out, std::size_t n);
double sum_log_clamped(const double* p, std::size_t n);
}  // namespace scalar

#if defined(MVPCL_HAVE_AVX2)
namespace avx2 {
void probit_terms(const double* eta, double* log_cdf, double* mills, std::size_t n);
void bvn_cdf(const double* h, const double* k, double rho, double* out, std::size_t n);
double sum_log_clamped(const double* p, std::size_t n);

// Exposed for the equivalence tests.
void exp(const double* x, double* out, std::size_t n);
void log(const double* x, double* out, std::size_t n);
void norm_cdf(const double* x, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace mvpcl::kernels
