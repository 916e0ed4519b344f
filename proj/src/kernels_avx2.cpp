#include <immintrin.h>

#include "rsb/kernels.hpp"
#include "rsb/philox.hpp"

namespace rsb::kernels::avx2 {

namespace {

struct Block4 {
  __m256d u_even;  // uniforms for indices 2j, j = j0..j0+3
  __m256d u_odd;   // uniforms for indices 2j+1
};

inline __m256i mul_lo_hi(__m256i x, __m256i mul, __m256i& hi) {
  const __m256i prod = _mm256_mul_epu32(x, mul);
  hi = _mm256_srli_epi64(prod, 32);
  return _mm256_and_si256(prod, _mm256_set1_epi64x(0xFFFFFFFFLL));
}

inline __m256d unit_from_words(__m256i lo, __m256i hi) {
  const __m256i bits = _mm256_or_si256(_mm256_slli_epi64(hi, 32), lo);
  const __m256i mant = _mm256_or_si256(_mm256_srli_epi64(bits, 12), _mm256_set1_epi64x(0x3FF0000000000000LL));
  return _mm256_sub_pd(_mm256_castsi256_pd(mant), _mm256_set1_pd(1.0));
}

// Philox4x32-10 on four consecutive counters, one per 64-bit lane.
Block4 philox4(std::uint64_t seed, std::uint64_t stream, std::uint64_t j0) {
  const __m256i mask32 = _mm256_set1_epi64x(0xFFFFFFFFLL);
  const __m256i j = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(j0)), _mm256_set_epi64x(3, 2, 1, 0));
  __m256i c0 = _mm256_and_si256(j, mask32);
  __m256i c1 = _mm256_srli_epi64(j, 32);
  __m256i c2 = _mm256_set1_epi64x(static_cast<long long>(stream & 0xFFFFFFFFULL));
  __m256i c3 = _mm256_set1_epi64x(static_cast<long long>(stream >> 32));
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  const __m256i m0 = _mm256_set1_epi64x(Philox4x32::kMul0);
  const __m256i m1 = _mm256_set1_epi64x(Philox4x32::kMul1);
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += Philox4x32::kWeyl0;
      k1 += Philox4x32::kWeyl1;
    }
    __m256i hi0;
    __m256i hi1;
    const __m256i lo0 = mul_lo_hi(c0, m0, hi0);
    const __m256i lo1 = mul_lo_hi(c2, m1, hi1);
    const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), _mm256_set1_epi64x(k0));
    const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), _mm256_set1_epi64x(k1));
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
  }
  return {unit_from_words(c0, c1), unit_from_words(c2, c3)};
}

inline __m256d poly6(__m256d z, const std::array<double, 6>& coef) {
  __m256d p = _mm256_set1_pd(coef[0]);
  for (int i = 1; i < 6; ++i) p = _mm256_add_pd(_mm256_mul_pd(p, z), _mm256_set1_pd(coef[i]));
  return p;
}

// Same operation order as kernels::sincos_2pi, so results match bit for bit.
inline void sincos_2pi4(__m256d u, __m256d& sin_out, __m256d& cos_out) {
  const __m256d t = _mm256_mul_pd(_mm256_set1_pd(4.0), u);
  const __m256d q = _mm256_round_pd(t, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d x = _mm256_mul_pd(_mm256_sub_pd(t, q), _mm256_set1_pd(std::numbers::pi / 2.0));
  const __m256d z = _mm256_mul_pd(x, x);
  const __m256d ps = poly6(z, detail::kSinCoef);
  const __m256d pc = poly6(z, detail::kCosCoef);
  const __m256d s = _mm256_add_pd(x, _mm256_mul_pd(x, _mm256_mul_pd(z, ps)));
  const __m256d c = _mm256_add_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(_mm256_set1_pd(0.5), z)),
                                  _mm256_mul_pd(_mm256_mul_pd(z, z), pc));
  const __m256d q1 = _mm256_cmp_pd(q, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const __m256d q2 = _mm256_cmp_pd(q, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
  const __m256d q3 = _mm256_cmp_pd(q, _mm256_set1_pd(3.0), _CMP_EQ_OQ);
  const __m256d swap = _mm256_or_pd(q1, q3);
  const __m256d sin_neg = _mm256_or_pd(q2, q3);
  const __m256d cos_neg = _mm256_or_pd(q1, q2);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d sv = _mm256_blendv_pd(s, c, swap);
  const __m256d cv = _mm256_blendv_pd(c, s, swap);
  sin_out = _mm256_xor_pd(sv, _mm256_and_pd(sign, sin_neg));
  cos_out = _mm256_xor_pd(cv, _mm256_and_pd(sign, cos_neg));
}

}  // namespace

void unit_phasors(std::uint64_t seed, std::uint64_t stream, std::uint64_t first, std::span<double> re,
                  std::span<double> im) {
  std::size_t n = 0;
  const std::size_t total = re.size();
  // Odd leading index and short tails go through the scalar reference.
  if ((first & 1) != 0 && total > 0) {
    scalar::unit_phasors(seed, stream, first, re.subspan(0, 1), im.subspan(0, 1));
    n = 1;
  }
  for (; n + 8 <= total; n += 8) {
    const std::uint64_t j0 = (first + n) / 2;
    const Block4 b = philox4(seed, stream, j0);
    __m256d s_even;
    __m256d c_even;
    __m256d s_odd;
    __m256d c_odd;
    sincos_2pi4(b.u_even, s_even, c_even);
    sincos_2pi4(b.u_odd, s_odd, c_odd);
    // Interleave (even_j, odd_j) pairs back into index order.
    const __m256d c_lo = _mm256_unpacklo_pd(c_even, c_odd);  // e0 o0 e2 o2
    const __m256d c_hi = _mm256_unpackhi_pd(c_even, c_odd);  // e1 o1 e3 o3
    const __m256d s_lo = _mm256_unpacklo_pd(s_even, s_odd);
    const __m256d s_hi = _mm256_unpackhi_pd(s_even, s_odd);
    _mm256_storeu_pd(re.data() + n, _mm256_permute2f128_pd(c_lo, c_hi, 0x20));
    _mm256_storeu_pd(re.data() + n + 4, _mm256_permute2f128_pd(c_lo, c_hi, 0x31));
    _mm256_storeu_pd(im.data() + n, _mm256_permute2f128_pd(s_lo, s_hi, 0x20));
    _mm256_storeu_pd(im.data() + n + 4, _mm256_permute2f128_pd(s_lo, s_hi, 0x31));
  }
  if (n < total) scalar::unit_phasors(seed, stream, first + n, re.subspan(n), im.subspan(n));
}

void accumulate_moments(std::span<const double> omega, std::span<const double> weight, std::span<const double> c,
                        std::span<const double> s, double center, Moments& m_re, Moments& m_im) {
  __m256d acc_re[kMomentOrder];
  __m256d acc_im[kMomentOrder];
  for (int k = 0; k < kMomentOrder; ++k) {
    acc_re[k] = _mm256_setzero_pd();
    acc_im[k] = _mm256_setzero_pd();
  }
  const __m256d vc = _mm256_set1_pd(center);
  const std::size_t n = omega.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(omega.data() + i), vc);
    const __m256d w = _mm256_loadu_pd(weight.data() + i);
    __m256d a_re = _mm256_mul_pd(w, _mm256_loadu_pd(c.data() + i));
    __m256d a_im = _mm256_mul_pd(w, _mm256_loadu_pd(s.data() + i));
    for (int k = 0; k < kMomentOrder; ++k) {
      acc_re[k] = _mm256_add_pd(acc_re[k], a_re);
      acc_im[k] = _mm256_add_pd(acc_im[k], a_im);
      a_re = _mm256_mul_pd(a_re, d);
      a_im = _mm256_mul_pd(a_im, d);
    }
  }
  Moments tail_re{};
  Moments tail_im{};
  if (i < n) {
    scalar::accumulate_moments(omega.subspan(i), weight.subspan(i), c.subspan(i), s.subspan(i), center, tail_re,
                               tail_im);
  }
  for (int k = 0; k < kMomentOrder; ++k) {
    alignas(32) double lr[4];
    alignas(32) double li[4];
    _mm256_store_pd(lr, acc_re[k]);
    _mm256_store_pd(li, acc_im[k]);
    m_re[k] += ((lr[0] + lr[1]) + (lr[2] + lr[3])) + tail_re[k];
    m_im[k] += ((li[0] + li[1]) + (li[2] + li[3])) + tail_im[k];
  }
}

}  // namespace rsb::kernels::avx2
