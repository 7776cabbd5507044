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

#include "mvpcl/kernels.hpp"
#include "mvpcl/numerics.hpp"

namespace mvpcl::kernels::scalar {

void probit_terms(const double* eta, double* log_cdf, double* mills, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    log_cdf[i] = log_norm_cdf(eta[i]);
    mills[i] = mills_ratio(eta[i]);
  }
}

void bvn_cdf(const double* h, const double* k, double rho, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = mvpcl::bvn_cdf(h[i], k[i], rho);
  }
}

double sum_log_clamped(const double* p, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::log(clamp_prob(p[i]));
  }
  return total;
}

}  // namespace mvpcl::kernels::scalar
