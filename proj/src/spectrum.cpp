#include "rsb/spectrum.hpp"

#include <cmath>

#include "rsb/error.hpp"

namespace rsb {

SpectrumPlan SpectrumPlan::build(std::span<const double> omega) {
  SpectrumPlan plan;
  std::size_t i = 0;
  while (i < omega.size()) {
    const double b = std::floor(omega[i] / kSpectrumBinWidth);
    const double upper = (b + 1.0) * kSpectrumBinWidth;
    std::size_t j = i + 1;
    while (j < omega.size() && omega[j] < upper) ++j;
    plan.bin_start.push_back(i);
    plan.centers.push_back((b + 0.5) * kSpectrumBinWidth);
    i = j;
  }
  plan.bin_start.push_back(omega.size());
  return plan;
}

void SpectrumMoments::reset(std::size_t bins) {
  re.assign(bins, kernels::Moments{});
  im.assign(bins, kernels::Moments{});
}

SpectrumBasis::SpectrumBasis(const SpectrumPlan& plan, std::span<const double> points)
    : n_points_(points.size()), n_bins_(plan.bins()) {
  phase_.resize(n_points_ * n_bins_);
  taylor_.resize(n_points_ * kernels::kMomentOrder);
  for (std::size_t i = 0; i < n_points_; ++i) {
    const double h = points[i];
    if (!(std::abs(h) <= 1.0)) throw_invalid("spectrum evaluation point outside [-1,1]");
    for (std::size_t b = 0; b < n_bins_; ++b) {
      const double arg = h * plan.centers[b];
      phase_[i * n_bins_ + b] = {std::cos(arg), -std::sin(arg)};
    }
    std::complex<double> term{1.0, 0.0};
    const std::complex<double> step{0.0, -h};
    for (int k = 0; k < kernels::kMomentOrder; ++k) {
      taylor_[i * kernels::kMomentOrder + k] = term;
      term = term * step / static_cast<double>(k + 1);
    }
  }
}

void SpectrumBasis::evaluate(const SpectrumMoments& moments, std::span<double> out) const {
  if (out.size() != n_points_ || moments.re.size() != n_bins_) throw_invalid("spectrum basis size mismatch");
  for (std::size_t i = 0; i < n_points_; ++i) {
    const std::complex<double>* tay = &taylor_[i * kernels::kMomentOrder];
    const std::complex<double>* ph = &phase_[i * n_bins_];
    double acc = 0.0;
    for (std::size_t b = 0; b < n_bins_; ++b) {
      const kernels::Moments& mr = moments.re[b];
      const kernels::Moments& mi = moments.im[b];
      double pr = 0.0;
      double pi = 0.0;
      for (int k = kernels::kMomentOrder - 1; k >= 0; --k) {
        pr += tay[k].real() * mr[k] - tay[k].imag() * mi[k];
        pi += tay[k].real() * mi[k] + tay[k].imag() * mr[k];
      }
      acc += ph[b].real() * pr - ph[b].imag() * pi;
    }
    out[i] = acc;
  }
}

SpectrumMoments real_amplitude_moments(const SpectrumPlan& plan, std::span<const double> omega,
                                       std::span<const double> weight) {
  SpectrumMoments m;
  m.reset(plan.bins());
  std::vector<double> ones;
  std::vector<double> zeros;
  for (std::size_t b = 0; b < plan.bins(); ++b) {
    const std::size_t lo = plan.bin_start[b];
    const std::size_t n = plan.bin_start[b + 1] - lo;
    ones.assign(n, 1.0);
    zeros.assign(n, 0.0);
    kernels::scalar::accumulate_moments(omega.subspan(lo, n), weight.subspan(lo, n), ones, zeros, plan.centers[b],
                                        m.re[b], m.im[b]);
  }
  return m;
}

}  // namespace rsb
