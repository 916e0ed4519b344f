#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rsb/primes.hpp"
#include "rsb/spectrum.hpp"

namespace rsb {

/// Parameters of one sampled field: T = exp(log_T), scale split alpha, and
/// a midpoint grid h_i = (i + 1/2) / grid_size on [0,1].
struct FieldConfig {
  double log_T = 0.0;
  double alpha = 0.5;
  std::size_t grid_size = 0;
  int oversample = 8;
  std::uint64_t seed = 0;

  /// Throws invalid-argument unless log_T > e, 0 < alpha < 1, oversample >= 1
  /// and grid_size >= ceil(oversample * log_T).
  void validate() const;
  static std::size_t min_grid_size(double log_T, int oversample);
  /// Config with the smallest admissible grid.
  static FieldConfig with_min_grid(double log_T, double alpha, int oversample, std::uint64_t seed);
};

std::vector<double> midpoint_grid(std::size_t n);

enum class FieldPath { Binned, Direct };

/// One replica: low = X_h(0, alpha), high = X_h(alpha, 1) on the grid.
struct FieldSample {
  std::vector<double> low;
  std::vector<double> high;
  FieldConfig config;
  std::uint64_t replica_id = 0;

  std::vector<double> full() const;
};

/// values = (1 + u) low + high.
struct PerturbedField {
  std::vector<double> values;
  double u = 0.0;
};

/// Samples X_h = sum_p cos(theta_p - h log p) / sqrt(p) split over two
/// disjoint prime index ranges. theta_p = 2 pi u_p with u_p from the Philox
/// stream keyed by (seed, replica) at counter (table index of p) / 2, so a
/// prime's phase does not depend on which window or worker evaluates it.
/// The table must outlive the sampler.
class FieldSampler {
 public:
  FieldSampler(const PrimeTable& table, IndexRange low, IndexRange high, std::vector<double> grid,
               std::uint64_t seed, FieldPath path = FieldPath::Binned);

  static FieldSampler for_config(const FieldConfig& config, const PrimeTable& table,
                                 FieldPath path = FieldPath::Binned);

  void sample(std::uint64_t replica, std::span<double> low, std::span<double> high) const;

  std::span<const double> grid() const noexcept { return grid_; }
  std::size_t grid_size() const noexcept { return grid_.size(); }
  IndexRange low_range() const noexcept { return low_.range; }
  IndexRange high_range() const noexcept { return high_.range; }
  std::uint64_t seed() const noexcept { return seed_; }
  const PrimeTable& table() const noexcept { return *table_; }

 private:
  struct Part {
    IndexRange range;
    SpectrumPlan plan;
    SpectrumBasis basis;
  };

  Part make_part(IndexRange range) const;
  void sample_part(const Part& part, std::uint64_t replica, std::span<double> out) const;
  void sample_part_direct(const Part& part, std::uint64_t replica, std::span<double> out) const;

  const PrimeTable* table_;
  std::vector<double> grid_;
  std::uint64_t seed_;
  FieldPath path_;
  Part low_;
  Part high_;
};

FieldSample sample_field(const FieldConfig& config, const PrimeTable& table, std::uint64_t replica_id);

/// Throws invalid-argument unless |u| < 1.
PerturbedField perturb(const FieldSample& sample, double u);
/// Same combination on raw component arrays, written into out.
void perturb_into(std::span<const double> low, std::span<const double> high, double u, std::span<double> out);

/// E[X_h X_h'] = (1/2) sum_window cos(|h - h'| log p) / p.
double covariance_exact(double h, double h_prime, const PrimeTable& table, const PrimeWindow& window);
double covariance_exact(double h, double h_prime, const PrimeTable& table, const ScaleRange& range);

/// Correlation coefficient over the full window p <= exp(log_T). Unclamped.
double overlap_rho(double h, double h_prime, const PrimeTable& table, double log_T);

/// rho(h_i, h_j) for a uniform grid of spacing 1/N depends only on the lag
/// |i - j|; this table holds rho(k / N) for k = 0 .. N-1 over a prime window.
class OverlapTable {
 public:
  OverlapTable() = default;
  OverlapTable(const PrimeTable& table, const PrimeWindow& window, std::size_t grid_size);
  static OverlapTable for_log_T(const PrimeTable& table, double log_T, std::size_t grid_size);

  std::size_t grid_size() const noexcept { return rho_.size(); }
  double variance() const noexcept { return variance_; }
  double rho_at_lag(std::size_t lag) const { return rho_.at(lag); }
  double rho(std::size_t i, std::size_t j) const { return rho_[i > j ? i - j : j - i]; }
  std::span<const double> by_lag() const noexcept { return rho_; }

 private:
  std::vector<double> rho_;
  double variance_ = 0.0;
};

/// Replica dump, CSV v1: header "replica_id,grid_index,h,low,high".
void write_replica_dump(std::ostream& os, std::span<const FieldSample> samples);
std::vector<FieldSample> read_replica_dump(std::istream& is);

}  // namespace rsb
