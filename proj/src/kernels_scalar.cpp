#include "rsb/kernels.hpp"
#include "rsb/philox.hpp"

namespace rsb::kernels::scalar {

void unit_phasors(std::uint64_t seed, std::uint64_t stream, std::uint64_t first, std::span<double> re,
                  std::span<double> im) {
  std::array<double, 2> pair{};
  std::uint64_t cached = ~std::uint64_t{0};
  for (std::size_t n = 0; n < re.size(); ++n) {
    const std::uint64_t k = first + n;
    if (k / 2 != cached) {
      cached = k / 2;
      pair = philox_uniform_pair(seed, stream, cached);
    }
    const SinCos sc = sincos_2pi(pair[k & 1]);
    re[n] = sc.cos;
    im[n] = sc.sin;
  }
}

void accumulate_moments(std::span<const double> omega, std::span<const double> weight, std::span<const double> c,
                        std::span<const double> s, double center, Moments& m_re, Moments& m_im) {
  // Four interleaved partial sums plus a sequential tail, the same order as
  // the AVX2 lanes.
  double lane_re[kMomentOrder][4] = {};
  double lane_im[kMomentOrder][4] = {};
  const std::size_t n = omega.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      const double d = omega[i + l] - center;
      double a_re = weight[i + l] * c[i + l];
      double a_im = weight[i + l] * s[i + l];
      for (int k = 0; k < kMomentOrder; ++k) {
        lane_re[k][l] += a_re;
        lane_im[k][l] += a_im;
        a_re *= d;
        a_im *= d;
      }
    }
  }
  Moments tail_re{};
  Moments tail_im{};
  for (; i < n; ++i) {
    const double d = omega[i] - center;
    double a_re = weight[i] * c[i];
    double a_im = weight[i] * s[i];
    for (int k = 0; k < kMomentOrder; ++k) {
      tail_re[k] += a_re;
      tail_im[k] += a_im;
      a_re *= d;
      a_im *= d;
    }
  }
  for (int k = 0; k < kMomentOrder; ++k) {
    const double* lr = lane_re[k];
    const double* li = lane_im[k];
    m_re[k] += ((lr[0] + lr[1]) + (lr[2] + lr[3])) + tail_re[k];
    m_im[k] += ((li[0] + li[1]) + (li[2] + li[3])) + tail_im[k];
  }
}

}  // namespace rsb::kernels::scalar
