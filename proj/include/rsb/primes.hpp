#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rsb {

/// Resource caps for sieving. The byte budget covers the finished table
/// (4 + 8 + 8 bytes per prime), estimated from Rosser's bound on pi(x).
struct SieveLimits {
  std::uint64_t max_limit = 4'000'000'000ULL;
  std::uint64_t memory_budget_bytes = 3ULL << 30;
};

/// Hard cap on scale_cutoff results (matches the default sieve cap).
inline constexpr std::uint64_t kDefaultCutoffCap = 4'000'000'000ULL;

/// Primes p with lo_exclusive < p <= hi_inclusive.
struct PrimeWindow {
  std::uint64_t lo_exclusive = 1;
  std::uint64_t hi_inclusive = 1;

  bool empty() const noexcept { return hi_inclusive <= lo_exclusive; }
};

/// Half-open range of indices into a PrimeTable.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  bool empty() const noexcept { return size() == 0; }
};

/// Scale window {p : (log T)^alpha_lo < log p <= (log T)^alpha_hi};
/// alpha_lo == 0 keeps every prime from 2 upwards.
struct ScaleRange {
  double alpha_lo = 0.0;
  double alpha_hi = 1.0;
  double log_T = 0.0;

  /// Throws invalid-argument unless 0 <= alpha_lo <= alpha_hi <= 1,
  /// alpha_hi > 0 and log_T > e.
  void validate() const;
  PrimeWindow window() const;
};

/// Sieved primes with log p and p^{-1/2}. Immutable once built.
class PrimeTable {
 public:
  PrimeTable() = default;
  PrimeTable(std::uint64_t limit, std::vector<std::uint32_t> primes);

  std::uint64_t limit() const noexcept { return limit_; }
  std::size_t size() const noexcept { return primes_.size(); }

  std::span<const std::uint32_t> primes() const noexcept { return primes_; }
  std::span<const double> log_p() const noexcept { return log_p_; }
  std::span<const double> inv_sqrt_p() const noexcept { return inv_sqrt_p_; }

  /// Index range of the window; throws coverage if the window reaches past limit().
  IndexRange indices(const PrimeWindow& window) const;
  /// Index of p in the table, or throws invalid-argument if p is not a tabulated prime.
  std::size_t index_of(std::uint64_t p) const;

 private:
  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> primes_;
  std::vector<double> log_p_;
  std::vector<double> inv_sqrt_p_;
};

/// Segmented, odd-only sieve of Eratosthenes over [2, limit].
PrimeTable sieve_primes(std::uint64_t limit, const SieveLimits& limits = {});

/// floor(exp((log T)^alpha)), snapping to the nearest integer when the
/// exponential lands within 1e-12 relative of it (so ln(10^8) maps to 10^8).
std::uint64_t scale_cutoff(double log_T, double alpha, std::uint64_t cap = kDefaultCutoffCap);

/// Sum of 1/p over the window, ascending p, compensated.
double prime_reciprocal_sum(const PrimeTable& table, const PrimeWindow& window);
double prime_reciprocal_sum(const PrimeTable& table, const ScaleRange& range);

/// Sum of cos(delta * log p) / p over the window, ascending p, compensated.
double cosine_prime_sum(const PrimeTable& table, const PrimeWindow& window, double delta);
double cosine_prime_sum(const PrimeTable& table, const ScaleRange& range, double delta);

// Binary cache: 8-byte magic "RSBPRIME", u32 version, u64 limit, u64 count,
// then LEB128-encoded gaps (first gap measured from 0). Little-endian.
inline constexpr std::uint32_t kPrimeCacheVersion = 1;
void save_prime_cache(const PrimeTable& table, const std::filesystem::path& path);
PrimeTable load_prime_cache(const std::filesystem::path& path);

}  // namespace rsb
