#pragma once

// Binned Taylor evaluation of trigonometric prime sums
//
//   S(h) = Re sum_p a_p exp(-i h omega_p),   omega_p = log p,  |h| <= 1.
//
// Frequencies are grouped into bins of width 1/16; inside a bin with centre
// omega_b, exp(-i h (omega_b + d)) is expanded to kMomentOrder terms in
// (h d). With |d| <= 1/32 the truncation error per prime is below
// (1/32)^8 / 8! ~ 2e-17 relative to |a_p|. Per-bin moments sum_p a_p d^k
// are the only part that depends on the amplitudes.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "rsb/kernels.hpp"

namespace rsb {

inline constexpr double kSpectrumBinWidth = 1.0 / 16.0;

/// Contiguous frequency bins over one ascending run of frequencies.
struct SpectrumPlan {
  std::vector<std::size_t> bin_start;  // offsets into the run; size = bins + 1
  std::vector<double> centers;

  static SpectrumPlan build(std::span<const double> omega);
  std::size_t bins() const noexcept { return centers.size(); }
};

/// Per-bin complex moments.
struct SpectrumMoments {
  std::vector<kernels::Moments> re;
  std::vector<kernels::Moments> im;

  void reset(std::size_t bins);
};

/// Evaluation matrices for a fixed set of points h against a plan's centres.
class SpectrumBasis {
 public:
  SpectrumBasis() = default;
  SpectrumBasis(const SpectrumPlan& plan, std::span<const double> points);

  std::size_t points() const noexcept { return n_points_; }
  /// out[i] = Re sum_b exp(-i h_i omega_b) sum_k (-i h_i)^k / k! m_{b,k}.
  void evaluate(const SpectrumMoments& moments, std::span<double> out) const;

 private:
  std::size_t n_points_ = 0;
  std::size_t n_bins_ = 0;
  std::vector<std::complex<double>> phase_;  // [point][bin]
  std::vector<std::complex<double>> taylor_;  // [point][k]
};

/// Moments of deterministic real amplitudes a_p = weight_p over a run.
SpectrumMoments real_amplitude_moments(const SpectrumPlan& plan, std::span<const double> omega,
                                       std::span<const double> weight);

}  // namespace rsb
