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

// AVX2+FMA kernels. This translation unit is the only one compiled with
// -mavx2 -mfma; it must not instantiate templates shared with the rest of
// the library (no Eigen, no <algorithm>), or the linker may pick an AVX2
// copy for callers on older CPUs.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstring>

#include "mvpcl/kernels.hpp"
#include "mvpcl/numerics.hpp"

namespace mvpcl::kernels::avx2 {
namespace {

using V = __m256d;
constexpr std::size_t kLanes = 4;

constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kLog2e = 1.44269504088896338700e+00;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kHalfSqrt2 = kSqrt2 / 2.0;
constexpr double kPi = 3.14159265358979323846;

inline V set1(double x) { return _mm256_set1_pd(x); }
inline V fma(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
inline V blend(V if_false, V if_true, V mask) { return _mm256_blendv_pd(if_false, if_true, mask); }
inline V lt(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
inline V le(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
inline V gt(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
inline V ge(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_GE_OQ); }

// 2^n for integer-valued n in [-1022, 1023].
inline V pow2i(V n) {
  const V magic = set1(6755399441055744.0);  // 1.5 * 2^52
  const __m256i bits = _mm256_castpd_si256(_mm256_add_pd(n, magic));
  const __m256i ni = _mm256_sub_epi64(bits, _mm256_castpd_si256(magic));
  const __m256i e = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_castsi256_pd(e);
}

struct Factorials {
  double inv[14];
  constexpr Factorials() : inv{} {
    double f = 1.0;
    inv[0] = 1.0;
    for (int i = 1; i < 14; ++i) {
      f *= i;
      inv[i] = 1.0 / f;
    }
  }
};
constexpr Factorials kFact;

// exp(x): Taylor polynomial of degree 13 on |r| <= ln2/2 after range reduction.
inline V exp_pd(V x) {
  const V underflow = lt(x, set1(-745.2));
  x = _mm256_max_pd(_mm256_min_pd(x, set1(709.78)), set1(-745.2));
  const V n = _mm256_round_pd(_mm256_mul_pd(x, set1(kLog2e)),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  V r = _mm256_fnmadd_pd(n, set1(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, set1(kLn2Lo), r);
  V p = set1(kFact.inv[13]);
  for (int i = 12; i >= 0; --i) {
    p = fma(p, r, set1(kFact.inv[i]));
  }
  // Two-step scaling keeps both factors normal down to the subnormal range.
  const V n1 = _mm256_floor_pd(_mm256_mul_pd(n, set1(0.5)));
  const V n2 = _mm256_sub_pd(n, n1);
  p = _mm256_mul_pd(_mm256_mul_pd(p, pow2i(n1)), pow2i(n2));
  return _mm256_andnot_pd(underflow, p);
}

// ln(x) for positive normal x: x = 2^e m, ln m = 2 atanh((m-1)/(m+1)).
inline V log_pd(V x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const V two52 = set1(4503599627370496.0);
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  V e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, set1(1023.0));
  const __m256i mant = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
      _mm256_set1_epi64x(0x3FF0000000000000LL));
  V m = _mm256_castsi256_pd(mant);
  const V big = gt(m, set1(kSqrt2));
  m = blend(m, _mm256_mul_pd(m, set1(0.5)), big);
  e = blend(e, _mm256_add_pd(e, set1(1.0)), big);

  const V one = set1(1.0);
  const V s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const V s2 = _mm256_mul_pd(s, s);
  V poly = set1(1.0 / 23.0);
  for (int k = 21; k >= 3; k -= 2) {
    poly = fma(poly, s2, set1(1.0 / k));
  }
  poly = fma(poly, s2, one);
  const V logm = _mm256_mul_pd(_mm256_add_pd(s, s), poly);
  return fma(e, set1(kLn2Hi), fma(e, set1(kLn2Lo), logm));
}

struct Erfc {
  V erfc;
  V erfcx;
};

// Cody (1969) erfc and exp(y^2) erfc(y) for y >= 0, all three ranges
// evaluated and blended.
inline Erfc erfc_pos(V y) {
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
  const V one = set1(1.0);

  // |y| <= 0.46875
  const V ya = _mm256_min_pd(y, set1(0.46875));
  const V ysq = _mm256_mul_pd(ya, ya);
  V num = _mm256_mul_pd(set1(a[4]), ysq);
  V den = ysq;
  for (int i = 0; i < 3; ++i) {
    num = _mm256_mul_pd(_mm256_add_pd(num, set1(a[i])), ysq);
    den = _mm256_mul_pd(_mm256_add_pd(den, set1(b[i])), ysq);
  }
  const V erf_a = _mm256_div_pd(_mm256_mul_pd(ya, _mm256_add_pd(num, set1(a[3]))),
                                _mm256_add_pd(den, set1(b[3])));
  const V erfc_a = _mm256_sub_pd(one, erf_a);
  const V erfcx_a = _mm256_mul_pd(exp_pd(ysq), erfc_a);

  // 0.46875 < y <= 4
  const V yb = _mm256_min_pd(y, set1(4.0));
  num = _mm256_mul_pd(set1(c[8]), yb);
  den = yb;
  for (int i = 0; i < 7; ++i) {
    num = _mm256_mul_pd(_mm256_add_pd(num, set1(c[i])), yb);
    den = _mm256_mul_pd(_mm256_add_pd(den, set1(d[i])), yb);
  }
  const V erfcx_b = _mm256_div_pd(_mm256_add_pd(num, set1(c[7])), _mm256_add_pd(den, set1(d[7])));

  // y > 4
  const V yc = _mm256_max_pd(y, set1(4.0));
  const V inv = _mm256_div_pd(one, _mm256_mul_pd(yc, yc));
  num = _mm256_mul_pd(set1(p[5]), inv);
  den = inv;
  for (int i = 0; i < 4; ++i) {
    num = _mm256_mul_pd(_mm256_add_pd(num, set1(p[i])), inv);
    den = _mm256_mul_pd(_mm256_add_pd(den, set1(q[i])), inv);
  }
  V erfcx_c = _mm256_div_pd(_mm256_mul_pd(inv, _mm256_add_pd(num, set1(p[4]))),
                            _mm256_add_pd(den, set1(q[4])));
  erfcx_c = _mm256_div_pd(_mm256_sub_pd(set1(0.56418958354775628695), erfcx_c), yc);

  const V in_b = le(y, set1(4.0));
  const V in_a = le(y, set1(0.46875));
  V erfcx = blend(erfcx_c, erfcx_b, in_b);

  // exp(-y^2) split as exp(-t^2) exp(-(y - t)(y + t)), t = trunc(16 y) / 16.
  const V t = _mm256_mul_pd(_mm256_floor_pd(_mm256_mul_pd(y, set1(16.0))), set1(1.0 / 16.0));
  const V del = _mm256_mul_pd(_mm256_sub_pd(y, t), _mm256_add_pd(y, t));
  V erfc = _mm256_mul_pd(
      _mm256_mul_pd(exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(t, t))),
                    exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), del))),
      erfcx);
  erfc = _mm256_andnot_pd(ge(y, set1(26.543)), erfc);

  erfc = blend(erfc, erfc_a, in_a);
  erfcx = blend(erfcx, erfcx_a, in_a);
  return {erfc, erfcx};
}

inline V abs_pd(V x) { return _mm256_andnot_pd(set1(-0.0), x); }

inline V norm_cdf_pd(V x) {
  const V t = _mm256_mul_pd(x, set1(-kHalfSqrt2));
  const Erfc e = erfc_pos(abs_pd(t));
  const V half = _mm256_mul_pd(set1(0.5), e.erfc);
  return blend(_mm256_sub_pd(set1(1.0), half), half, ge(t, _mm256_setzero_pd()));
}

inline V clamp01(V x) { return _mm256_max_pd(_mm256_min_pd(x, set1(1.0)), _mm256_setzero_pd()); }

// Applies `body` to full vectors, then to a zero-padded tail so every element
// goes through the same vector code.
template <typename Body>
inline void for_each_block(std::size_t n, Body&& body) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    body(i, kLanes);
  }
  if (i < n) {
    body(i, n - i);
  }
}

inline V load(const double* src, std::size_t count, double pad) {
  if (count == kLanes) {
    return _mm256_loadu_pd(src);
  }
  alignas(32) double tmp[kLanes] = {pad, pad, pad, pad};
  std::memcpy(tmp, src, count * sizeof(double));
  return _mm256_load_pd(tmp);
}

inline void store(double* dst, V v, std::size_t count) {
  if (count == kLanes) {
    _mm256_storeu_pd(dst, v);
    return;
  }
  alignas(32) double tmp[kLanes];
  _mm256_store_pd(tmp, v);
  std::memcpy(dst, tmp, count * sizeof(double));
}

}  // namespace

void exp(const double* x, double* out, std::size_t n) {
  for_each_block(n, [&](std::size_t i, std::size_t c) { store(out + i, exp_pd(load(x + i, c, 0.0)), c); });
}

void log(const double* x, double* out, std::size_t n) {
  for_each_block(n, [&](std::size_t i, std::size_t c) { store(out + i, log_pd(load(x + i, c, 1.0)), c); });
}

void norm_cdf(const double* x, double* out, std::size_t n) {
  for_each_block(n, [&](std::size_t i, std::size_t c) { store(out + i, norm_cdf_pd(load(x + i, c, 0.0)), c); });
}

void probit_terms(const double* eta, double* log_cdf, double* mills, std::size_t n) {
  const V zero = _mm256_setzero_pd();
  for_each_block(n, [&](std::size_t i, std::size_t c) {
    const V x = load(eta + i, c, 0.0);
    const V y = _mm256_mul_pd(abs_pd(x), set1(kHalfSqrt2));
    const Erfc e = erfc_pos(y);
    const V negative = lt(x, zero);
    const V half = _mm256_mul_pd(set1(0.5), e.erfc);
    const V cdf = blend(_mm256_sub_pd(set1(1.0), half), half, negative);
    store(log_cdf + i, log_pd(_mm256_max_pd(cdf, set1(kMinProb))), c);

    const V pdf = _mm256_mul_pd(set1(kInvSqrt2Pi), exp_pd(_mm256_mul_pd(set1(-0.5), _mm256_mul_pd(x, x))));
    const V upper = _mm256_div_pd(pdf, cdf);
    const V lower = _mm256_div_pd(set1(2.0 * kInvSqrt2Pi), e.erfcx);
    store(mills + i, blend(upper, lower, negative), c);
  });
}

double sum_log_clamped(const double* p, std::size_t n) {
  V acc = _mm256_setzero_pd();
  for_each_block(n, [&](std::size_t i, std::size_t c) {
    const V v = _mm256_max_pd(load(p + i, c, 1.0), set1(kMinProb));
    acc = _mm256_add_pd(acc, log_pd(_mm256_min_pd(v, set1(1.0))));
  });
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, acc);
  return ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
}

void bvn_cdf(const double* h, const double* k, double rho, double* out, std::size_t n) {
  const auto rule = detail::bvn_rule(std::fabs(rho));
  const std::size_t lg = rule.abscissa.size();

  if (std::fabs(rho) < 0.925) {
    // exp((sn hk - hs) / (1 - sn^2)) = exp(coef_hk * hk - coef_hs * hs)
    double coef_hk[2 * 10];
    double coef_hs[2 * 10];
    double weight[2 * 10];
    const double asr = std::asin(rho);
    for (std::size_t i = 0; i < lg; ++i) {
      const double x = rule.abscissa[i];
      const double sn_lo = std::sin(asr * (1.0 - x) / 2.0);
      const double sn_hi = std::sin(asr * (1.0 + x) / 2.0);
      coef_hs[2 * i] = 1.0 / (1.0 - sn_lo * sn_lo);
      coef_hk[2 * i] = sn_lo * coef_hs[2 * i];
      coef_hs[2 * i + 1] = 1.0 / (1.0 - sn_hi * sn_hi);
      coef_hk[2 * i + 1] = sn_hi * coef_hs[2 * i + 1];
      weight[2 * i] = rule.weight[i];
      weight[2 * i + 1] = rule.weight[i];
    }
    const V scale = set1(asr / (4.0 * kPi));
    for_each_block(n, [&](std::size_t i, std::size_t c) {
      const V hv = load(h + i, c, 0.0);
      const V kv = load(k + i, c, 0.0);
      const V hk = _mm256_mul_pd(hv, kv);
      const V hs = _mm256_mul_pd(set1(0.5), fma(hv, hv, _mm256_mul_pd(kv, kv)));
      V acc = _mm256_setzero_pd();
      for (std::size_t j = 0; j < 2 * lg; ++j) {
        const V arg = _mm256_fmsub_pd(set1(coef_hk[j]), hk, _mm256_mul_pd(set1(coef_hs[j]), hs));
        acc = fma(set1(weight[j]), exp_pd(arg), acc);
      }
      const V indep = _mm256_mul_pd(norm_cdf_pd(hv), norm_cdf_pd(kv));
      store(out + i, clamp01(fma(acc, scale, indep)), c);
    });
    return;
  }

  // |rho| >= 0.925: Drezner-Wesolowsky expansion around |rho| = 1.
  const double as = (1.0 - rho) * (1.0 + rho);
  const double a = std::sqrt(as);
  const double a2 = a / 2.0;
  double xs1[10], rs1[10], xs2[10], rs2[10], wa[10];
  for (std::size_t j = 0; j < lg; ++j) {
    const double x = -rule.abscissa[j];
    xs1[j] = (a2 * (x + 1.0)) * (a2 * (x + 1.0));
    rs1[j] = std::sqrt(1.0 - xs1[j]);
    xs2[j] = as * (1.0 - x) * (1.0 - x) / 4.0;
    rs2[j] = std::sqrt(1.0 - xs2[j]);
    wa[j] = a2 * rule.weight[j];
  }
  const V one = set1(1.0);
  const V zero = _mm256_setzero_pd();
  const V asv = set1(as);
  const V av = set1(a);

  for_each_block(n, [&](std::size_t i, std::size_t c) {
    // Upper-orthant limits for P(X > -h, Y > -k).
    const V hh = _mm256_sub_pd(zero, load(h + i, c, 0.0));
    V kk = _mm256_sub_pd(zero, load(k + i, c, 0.0));
    if (rho < 0.0) {
      kk = _mm256_sub_pd(zero, kk);
    }
    const V hk = _mm256_mul_pd(hh, kk);
    const V diff = _mm256_sub_pd(hh, kk);
    const V bs = _mm256_mul_pd(diff, diff);
    const V cc = _mm256_mul_pd(_mm256_sub_pd(set1(4.0), hk), set1(1.0 / 8.0));
    const V dd = _mm256_mul_pd(_mm256_sub_pd(set1(12.0), hk), set1(1.0 / 16.0));
    const V dbs5 = _mm256_sub_pd(one, _mm256_mul_pd(dd, _mm256_mul_pd(bs, set1(0.2))));

    V bvn = _mm256_mul_pd(
        _mm256_mul_pd(av, exp_pd(_mm256_mul_pd(set1(-0.5), _mm256_add_pd(_mm256_div_pd(bs, asv), hk)))),
        _mm256_add_pd(_mm256_sub_pd(one, _mm256_mul_pd(_mm256_mul_pd(cc, _mm256_sub_pd(bs, asv)),
                                                       _mm256_mul_pd(dbs5, set1(1.0 / 3.0)))),
                      _mm256_mul_pd(_mm256_mul_pd(cc, dd), set1(as * as / 5.0))));

    const V b = _mm256_sqrt_pd(bs);
    const V tail = _mm256_mul_pd(
        _mm256_mul_pd(exp_pd(_mm256_mul_pd(set1(-0.5), hk)), set1(kSqrt2Pi)),
        _mm256_mul_pd(_mm256_mul_pd(norm_cdf_pd(_mm256_div_pd(_mm256_sub_pd(zero, b), av)), b),
                      _mm256_sub_pd(one, _mm256_mul_pd(_mm256_mul_pd(cc, bs),
                                                       _mm256_mul_pd(dbs5, set1(1.0 / 3.0))))));
    bvn = blend(bvn, _mm256_sub_pd(bvn, tail), gt(hk, set1(-160.0)));

    for (std::size_t j = 0; j < lg; ++j) {
      const V x1 = set1(xs1[j]);
      const V poly1 = fma(_mm256_mul_pd(cc, x1), fma(dd, x1, one), one);
      const V e1 = exp_pd(_mm256_sub_pd(_mm256_mul_pd(bs, set1(-0.5 / xs1[j])),
                                        _mm256_mul_pd(hk, set1(1.0 / (1.0 + rs1[j])))));
      const V e2 = exp_pd(_mm256_mul_pd(set1(-0.5), fma(bs, set1(1.0 / xs1[j]), hk)));
      bvn = fma(set1(wa[j]), _mm256_sub_pd(_mm256_mul_pd(e1, set1(1.0 / rs1[j])), _mm256_mul_pd(e2, poly1)), bvn);

      const V x2 = set1(xs2[j]);
      const V poly2 = fma(_mm256_mul_pd(cc, x2), fma(dd, x2, one), one);
      const V e3 = exp_pd(_mm256_mul_pd(set1(-0.5), fma(bs, set1(1.0 / xs2[j]), hk)));
      const V e4 = exp_pd(_mm256_mul_pd(hk, set1(-(1.0 - rs2[j]) / (2.0 * (1.0 + rs2[j])))));
      bvn = fma(_mm256_mul_pd(set1(wa[j]), e3), _mm256_sub_pd(_mm256_mul_pd(e4, set1(1.0 / rs2[j])), poly2), bvn);
    }
    bvn = _mm256_mul_pd(bvn, set1(-1.0 / (2.0 * kPi)));
    if (rho > 0.0) {
      bvn = _mm256_add_pd(bvn, norm_cdf_pd(_mm256_sub_pd(zero, _mm256_max_pd(hh, kk))));
    } else {
      const V gap = _mm256_sub_pd(norm_cdf_pd(_mm256_sub_pd(zero, hh)), norm_cdf_pd(_mm256_sub_pd(zero, kk)));
      bvn = _mm256_add_pd(_mm256_sub_pd(zero, bvn), _mm256_max_pd(zero, gap));
    }
    store(out + i, clamp01(bvn), c);
  });
}

}  // namespace mvpcl::kernels::avx2
