#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsb/field.hpp"

namespace rsb {

/// Discrete Gibbs measure on the grid. log_Z = log((1/N) sum_i exp(beta v_i)).
struct GibbsWeights {
  std::vector<double> weights;
  double log_Z = 0.0;
  double beta = 0.0;
};

GibbsWeights gibbs_weights(std::span<const double> values, double beta);
/// log_Z alone, without materialising the weights.
double log_partition(std::span<const double> values, double beta);

/// Replicas 0 .. count-1 (offset by first) of one config, sampled in parallel.
std::vector<FieldSample> sample_ensemble(const FieldConfig& config, const PrimeTable& table, std::size_t count,
                                         unsigned workers = 1, std::uint64_t first = 0);

struct FreeEnergyEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  double beta = 0.0;
  double alpha = 0.0;
  double u = 0.0;
  double log_T = 0.0;

  double normalized() const;
  double normalized_std_error() const;
};

/// Monte Carlo mean and standard error of log_Z for (1+u) low + high.
FreeEnergyEstimate free_energy_estimate(const FieldConfig& config, const PrimeTable& table, double beta, double u,
                                        std::size_t replicas, unsigned workers = 1);
FreeEnergyEstimate free_energy_from_samples(std::span<const FieldSample> samples, double beta, double u);

struct DerivativeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  double step = 0.0;
};

/// Central difference (F(step) - F(-step)) / (2 step) in u at u = 0 with
/// common random numbers (both sides on the same replicas).
DerivativeEstimate du_free_energy(const FieldConfig& config, const PrimeTable& table, double beta, double step,
                                  std::size_t replicas, unsigned workers = 1);
DerivativeEstimate du_free_energy_from_samples(std::span<const FieldSample> samples, double beta, double step);

/// Binned law of rho(h, h') under (averaged) G x G.
struct OverlapHistogram {
  std::vector<double> bin_edges;
  std::vector<double> masses;
  std::uint64_t pair_count = 0;
  double beta = 0.0;
  double u = 0.0;
  double log_T = 0.0;
  /// Sampled overlaps, all equally weighted; empty for enumerated laws.
  std::vector<double> samples;

  std::size_t bins() const noexcept { return masses.size(); }
  std::size_t bin_of(double rho) const;
  /// Mass of bins fully inside [lo, hi].
  double mass_within(double lo, double hi) const;
};

inline constexpr std::size_t kDefaultOverlapBins = 40;
inline constexpr std::size_t kDefaultPairsPerReplica = 64;

/// Empty histogram: `bins` equal bins over [-1, 1] (even counts put an edge at 0).
OverlapHistogram make_overlap_histogram(std::size_t bins = kDefaultOverlapBins);

/// Draws n_pairs index pairs i.i.d. from weights x weights (Philox stream
/// keyed by (seed, replica) in the pair-sampling domain) and bins rho.
OverlapHistogram sample_overlap_pairs(const GibbsWeights& weights, const OverlapTable& overlaps, std::size_t n_pairs,
                                      std::uint64_t seed, std::uint64_t replica,
                                      std::size_t bins = kDefaultOverlapBins);

/// Exact pushforward of weights x weights under rho by N^2 enumeration.
OverlapHistogram enumerate_overlap_law(const GibbsWeights& weights, const OverlapTable& overlaps,
                                       std::size_t bins = kDefaultOverlapBins);

/// Averages per-replica laws with equal weight (the empirical E[G x G]).
OverlapHistogram merge_overlap_histograms(std::span<const OverlapHistogram> parts);

struct FubiniCheck {
  double via_cdf = 0.0;       // integral_0^alpha P(rho <= s) ds from the binned CDF
  double via_identity = 0.0;  // E[(alpha - max(rho, 0)) 1{rho <= alpha}]
  double tolerance = 0.0;     // one bin width
  bool agree = false;
};

/// Both routes to integral_0^alpha x(s) ds. The identity route uses the raw
/// samples when present and bin midpoints otherwise.
FubiniCheck overlap_cdf_integral(const OverlapHistogram& histogram, double alpha);

}  // namespace rsb
