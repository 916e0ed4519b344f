#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "rsb/kernels.hpp"
#include "rsb/philox.hpp"
#include "rsb/spectrum.hpp"

using namespace rsb;

TEST_CASE("philox4x32-10 known answers") {
  using P = Philox4x32;
  CHECK(P::generate({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(P::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(P::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms and streams") {
  CHECK(unit_from_bits(0) == 0.0);
  CHECK(unit_from_bits(~0ULL) < 1.0);
  CHECK(stream_id(StreamDomain::FieldPhases, 5) != stream_id(StreamDomain::PairSampling, 5));
  PhiloxStream s(9, 3);
  const auto pair0 = philox_uniform_pair(9, 3, 0);
  const auto pair1 = philox_uniform_pair(9, 3, 1);
  CHECK(s.uniform() == pair0[0]);
  CHECK(s.uniform() == pair0[1]);
  CHECK(s.uniform() == pair1[0]);
  double sum = 0.0;
  PhiloxStream t(1, 1);
  for (int i = 0; i < 100000; ++i) sum += t.uniform();
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("sincos_2pi accuracy") {
  double worst = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double u = i / 100000.0;
    const kernels::SinCos sc = kernels::sincos_2pi(u);
    const long double a = 2.0L * std::numbers::pi_v<long double> * u;
    worst = std::max(worst, static_cast<double>(std::fabs(sc.cos - std::cos(a))));
    worst = std::max(worst, static_cast<double>(std::fabs(sc.sin - std::sin(a))));
  }
  CHECK(worst < 5e-16);
  CHECK(kernels::sincos_2pi(0.25).cos == doctest::Approx(0.0).epsilon(1e-16));
}

TEST_CASE("scalar phasors follow the counter layout") {
  std::vector<double> re(7), im(7);
  kernels::scalar::unit_phasors(11, 22, 3, re, im);
  for (std::size_t k = 0; k < 7; ++k) {
    const std::uint64_t idx = 3 + k;
    const double u = philox_uniform_pair(11, 22, idx / 2)[idx % 2];
    const kernels::SinCos sc = kernels::sincos_2pi(u);
    CHECK(re[k] == sc.cos);
    CHECK(im[k] == sc.sin);
  }
}

TEST_CASE("avx2 phasors are bit-identical to scalar") {
  if (!kernels::isa_supported(kernels::Isa::Avx2)) return;
  for (std::size_t n : {0u, 1u, 3u, 8u, 9u, 1000u, 4097u}) {
    for (std::uint64_t first : {0u, 1u, 2u, 7u, 100001u}) {
      std::vector<double> a(n), b(n), c(n), d(n);
      kernels::unit_phasors(kernels::Isa::Scalar, 5, 6, first, a, b);
      kernels::unit_phasors(kernels::Isa::Avx2, 5, 6, first, c, d);
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(a[i] == c[i]);
        REQUIRE(b[i] == d[i]);
      }
    }
  }
}

TEST_CASE("moment accumulation agrees across kernels") {
  const std::size_t n = 1237;
  std::vector<double> omega(n), w(n), c(n), s(n);
  kernels::scalar::unit_phasors(1, 2, 0, c, s);
  for (std::size_t i = 0; i < n; ++i) {
    omega[i] = 7.0 + 0.0625 * i / n;
    w[i] = 1.0 / std::sqrt(i + 2.0);
  }
  kernels::Moments sr{}, si{};
  kernels::accumulate_moments(kernels::Isa::Scalar, omega, w, c, s, 7.03125, sr, si);
  // Direct reference for m_k = sum w (c + i s) d^k.
  for (int k = 0; k < kernels::kMomentOrder; ++k) {
    long double rr = 0, ri = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double dk = std::pow(static_cast<long double>(omega[i] - 7.03125), k);
      rr += w[i] * c[i] * dk;
      ri += w[i] * s[i] * dk;
    }
    const double scale = std::pow(0.03125, k) * 40.0;
    CHECK(std::abs(sr[k] - static_cast<double>(rr)) <= 1e-13 * scale);
    CHECK(std::abs(si[k] - static_cast<double>(ri)) <= 1e-13 * scale);
  }
  if (kernels::isa_supported(kernels::Isa::Avx2)) {
    kernels::Moments vr{}, vi{};
    kernels::accumulate_moments(kernels::Isa::Avx2, omega, w, c, s, 7.03125, vr, vi);
    CHECK(vr == sr);
    CHECK(vi == si);
  }
}

TEST_CASE("isa parsing") {
  CHECK(kernels::parse_isa("scalar") == kernels::Isa::Scalar);
  CHECK(kernels::parse_isa("auto") == kernels::best_isa());
  CHECK_THROWS(kernels::parse_isa("sse9"));
}

TEST_CASE("spectrum evaluator matches direct cosine sums") {
  std::vector<double> omega, w;
  for (int p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97}) {
    omega.push_back(std::log(static_cast<double>(p)));
    w.push_back(1.0 / p);
  }
  const SpectrumPlan plan = SpectrumPlan::build(omega);
  CHECK(plan.bin_start.back() == omega.size());
  std::vector<double> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(-1.0 + i / 24.5);
  const SpectrumBasis basis(plan, pts);
  std::vector<double> out(pts.size());
  basis.evaluate(real_amplitude_moments(plan, omega, w), out);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double direct = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) direct += w[k] * std::cos(pts[i] * omega[k]);
    CHECK(out[i] == doctest::Approx(direct).epsilon(1e-13));
  }
}
