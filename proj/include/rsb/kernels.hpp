#pragma once

// Data-parallel inner loops of the field sampler. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant; the active
// variant is chosen once at startup from CPUID and may be overridden.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace rsb::kernels {

/// Taylor order of the binned spectral evaluator (terms k = 0..kMomentOrder-1).
inline constexpr int kMomentOrder = 8;

using Moments = std::array<double, kMomentOrder>;

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);
/// "scalar", "avx2" or "auto"; throws invalid-argument otherwise.
Isa parse_isa(std::string_view name);
bool isa_supported(Isa isa);
Isa best_isa();
Isa active_isa();
/// Throws invalid-argument if the CPU lacks the requested ISA.
void set_active_isa(Isa isa);

struct SinCos {
  double sin;
  double cos;
};

namespace detail {
// Cephes sin/cos minimax coefficients on [-pi/4, pi/4].
inline constexpr std::array<double, 6> kSinCoef = {
    1.58962301576546568060E-10, -2.50507477628578072866E-8, 2.75573136213857245213E-6,
    -1.98412698295895385996E-4, 8.33333333332211858878E-3,  -1.66666666666666307295E-1};
inline constexpr std::array<double, 6> kCosCoef = {
    -1.13585365213876817300E-11, 2.08757008419747316778E-9, -2.75573141792967388112E-7,
    2.48015872888517045348E-5,   -1.38888888888730564116E-3, 4.16666666666665929218E-2};
}  // namespace detail

/// sin and cos of 2*pi*u for u in [0,1). Quadrant reduction on 4u is exact.
inline SinCos sincos_2pi(double u) noexcept {
  const double t = 4.0 * u;
  const double q = std::nearbyint(t);
  const double x = (t - q) * (std::numbers::pi / 2.0);
  const double z = x * x;
  double ps = detail::kSinCoef[0];
  double pc = detail::kCosCoef[0];
  for (int i = 1; i < 6; ++i) {
    ps = ps * z + detail::kSinCoef[i];
    pc = pc * z + detail::kCosCoef[i];
  }
  const double s = x + x * (z * ps);
  const double c = (1.0 - 0.5 * z) + (z * z) * pc;
  switch (static_cast<int>(q) & 3) {
    case 0: return {s, c};
    case 1: return {c, -s};
    case 2: return {-s, -c};
    default: return {-c, s};
  }
}

/// Unit phasors (cos 2*pi*u_k, sin 2*pi*u_k) for global indices
/// k = first .. first + re.size() - 1, with u_{2j}, u_{2j+1} drawn from the
/// Philox block at counter (j, stream) under key seed.
void unit_phasors(Isa isa, std::uint64_t seed, std::uint64_t stream, std::uint64_t first,
                  std::span<double> re, std::span<double> im);

/// m_re[k] += sum_p w_p c_p (omega_p - center)^k, m_im likewise with s_p.
void accumulate_moments(Isa isa, std::span<const double> omega, std::span<const double> weight,
                        std::span<const double> c, std::span<const double> s, double center,
                        Moments& m_re, Moments& m_im);

namespace scalar {
void unit_phasors(std::uint64_t seed, std::uint64_t stream, std::uint64_t first, std::span<double> re,
                  std::span<double> im);
void accumulate_moments(std::span<const double> omega, std::span<const double> weight, std::span<const double> c,
                        std::span<const double> s, double center, Moments& m_re, Moments& m_im);
}  // namespace scalar

namespace avx2 {
void unit_phasors(std::uint64_t seed, std::uint64_t stream, std::uint64_t first, std::span<double> re,
                  std::span<double> im);
void accumulate_moments(std::span<const double> omega, std::span<const double> weight, std::span<const double> c,
                        std::span<const double> s, double center, Moments& m_re, Moments& m_im);
}  // namespace avx2

}  // namespace rsb::kernels
