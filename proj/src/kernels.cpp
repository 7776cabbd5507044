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

#include "mvpcl/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <string_view>

namespace mvpcl::kernels {
namespace {

constexpr KernelTable kScalar{Isa::kScalar, "scalar", &scalar::probit_terms, &scalar::bvn_cdf,
                              &scalar::sum_log_clamped};

#if defined(MVPCL_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::kAvx2, "avx2", &avx2::probit_terms, &avx2::bvn_cdf,
                            &avx2::sum_log_clamped};

bool cpu_has_avx2() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable& select() noexcept {
  const char* env = std::getenv("MVPCL_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") {
    return kScalar;
  }
  if (const KernelTable* t = avx2_table()) {
    return *t;
  }
  return kScalar;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(MVPCL_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

void probit_terms(std::span<const double> eta, std::span<double> log_cdf,
                  std::span<double> mills) {
  assert(log_cdf.size() == eta.size() && mills.size() == eta.size());
  active().probit_terms(eta.data(), log_cdf.data(), mills.data(), eta.size());
}

void bvn_cdf(std::span<const double> h, std::span<const double> k, double rho,
             std::span<double> out) {
  assert(k.size() == h.size() && out.size() == h.size());
  active().bvn_cdf(h.data(), k.data(), rho, out.data(), h.size());
}

double sum_log_clamped(std::span<const double> p) {
  return active().sum_log_clamped(p.data(), p.size());
}

}  // namespace mvpcl::kernels
