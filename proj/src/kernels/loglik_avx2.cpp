// AVX2+FMA variant of the Bernoulli 2PL kernel. This translation unit
// is compiled with -mavx2 -mfma and only ever called after a runtime
// CPU check (see dispatch.cpp).

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "itemlab/kernels.hpp"

namespace itemlab::kernels {

namespace {

// exp(x) for doubles, Cephes-style: x = n ln2 + r, exp(r) by a rational
// approximation in r^2, scale by 2^n through the exponent bits. Inputs
// are clamped to the normal range, so overflow/underflow saturate.
inline __m256d vexp(__m256d x) {
  const __m256d exp_hi = _mm256_set1_pd(709.0);
  const __m256d exp_lo = _mm256_set1_pd(-708.0);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

  x = _mm256_min_pd(_mm256_max_pd(x, exp_lo), exp_hi);

  const __m256d nf = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(nf, c1, x);
  r = _mm256_fnmadd_pd(nf, c2, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000005e0));

  const __m256d er = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  const __m256d expr = _mm256_fmadd_pd(_mm256_set1_pd(2.0), er, _mm256_set1_pd(1.0));

  // 2^n via the exponent field.
  const __m128i n32 = _mm256_cvtpd_epi32(nf);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(expr, _mm256_castsi256_pd(bits));
}

// log(x) for normal positive doubles, Cephes-style: frexp into
// m * 2^e with m in [sqrt(1/2), sqrt(2)), then a rational approximation
// around m = 1.
inline __m256d vlog(__m256d x) {
  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i half_exp = _mm256_set1_epi64x(0x3fe0000000000000LL);  // exponent of 0.5
  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);

  const __m256i ix = _mm256_castpd_si256(x);
  // biased exponent - 1022, so that the mantissa below lands in [0.5, 1)
  const __m256i biased = _mm256_srli_epi64(ix, 52);
  const __m256d e_all = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(_mm256_set1_pd(0x1.0p52)))),
      _mm256_set1_pd(0x1.0p52 + 1022.0));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(ix, mant_mask), half_exp));

  const __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  // m < sqrt(1/2): double the mantissa and drop the exponent by one.
  const __m256d e = _mm256_add_pd(e_all, _mm256_and_pd(below, _mm256_set1_pd(-1.0)));
  m = _mm256_blendv_pd(m, _mm256_add_pd(m, m), below);
  const __m256d z = _mm256_sub_pd(m, _mm256_set1_pd(1.0));

  __m256d p = _mm256_set1_pd(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(7.70838733755885391666e0));

  __m256d q = _mm256_add_pd(z, _mm256_set1_pd(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.31251620126765340583e1));

  const __m256d zz = _mm256_mul_pd(z, z);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, zz), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, y);
  const __m256d res = _mm256_add_pd(z, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double softplus_scalar(double s) {
  if (s > 0.0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

}  // namespace

double loglik_grad_avx2(const ObsTable& obs, const double* theta, const double* e,
                        const double* a, double* g_theta, double* g_e, double* g_a) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);

  __m256d ll_vec = zero;
  double ll_tail = 0.0;

  const std::size_t items = obs.n_items();
  for (std::size_t i = 0; i < items; ++i) {
    const double ai = a[i];
    const double ei = e[i];
    const __m256d av = _mm256_set1_pd(ai);
    const __m256d ev = _mm256_set1_pd(ei);

    __m256d sum_dy = zero;
    __m256d sum_dyx = zero;
    double sum_dy_tail = 0.0, sum_dyx_tail = 0.0;

    std::size_t n = obs.item_offset[i];
    const std::size_t end = obs.item_offset[i + 1];
    for (; n + 4 <= end; n += 4) {
      const __m128i idx =
          _mm_loadu_si128(reinterpret_cast<const __m128i*>(obs.participant.data() + n));
      const __m256d th = _mm256_i32gather_pd(theta, idx, 8);
      const __m256d y = _mm256_loadu_pd(obs.y.data() + n);

      const __m256d x = _mm256_add_pd(th, ev);
      const __m256d s = _mm256_mul_pd(av, x);

      // One exp serves both the probability and the softplus:
      //   u = exp(-|s|), p = (s >= 0 ? 1 : u) / (1 + u),
      //   softplus(s) = max(s, 0) + log(1 + u).
      const __m256d abs_s = _mm256_andnot_pd(sign_mask, s);
      const __m256d u = vexp(_mm256_sub_pd(zero, abs_s));
      const __m256d denom = _mm256_add_pd(one, u);
      const __m256d neg = _mm256_cmp_pd(s, zero, _CMP_LT_OQ);
      const __m256d num = _mm256_blendv_pd(one, u, neg);
      const __m256d p = _mm256_div_pd(num, denom);
      const __m256d softplus = _mm256_add_pd(_mm256_max_pd(s, zero), vlog(denom));

      ll_vec = _mm256_add_pd(ll_vec, _mm256_fmsub_pd(y, s, softplus));

      const __m256d dy = _mm256_sub_pd(y, p);
      sum_dy = _mm256_add_pd(sum_dy, dy);
      sum_dyx = _mm256_fmadd_pd(dy, x, sum_dyx);

      // No scatter in AVX2; the per-participant update stays scalar.
      alignas(32) double dth[4];
      _mm256_store_pd(dth, _mm256_mul_pd(av, dy));
      alignas(16) std::int32_t ji[4];
      _mm_store_si128(reinterpret_cast<__m128i*>(ji), idx);
      g_theta[ji[0]] += dth[0];
      g_theta[ji[1]] += dth[1];
      g_theta[ji[2]] += dth[2];
      g_theta[ji[3]] += dth[3];
    }
    for (; n < end; ++n) {
      const std::int32_t j = obs.participant[n];
      const double y = obs.y[n];
      const double x = theta[j] + ei;
      const double s = ai * x;
      const double p = 1.0 / (1.0 + std::exp(-s));
      const double dy = y - p;
      ll_tail += y * s - softplus_scalar(s);
      g_theta[j] += ai * dy;
      sum_dy_tail += dy;
      sum_dyx_tail += dy * x;
    }

    g_e[i] += ai * (hsum(sum_dy) + sum_dy_tail);
    g_a[i] += hsum(sum_dyx) + sum_dyx_tail;
  }
  return hsum(ll_vec) + ll_tail;
}

}  // namespace itemlab::kernels

#endif  // x86_64
