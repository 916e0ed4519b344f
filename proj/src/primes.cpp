#include "rsb/primes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rsb/error.hpp"
#include "rsb/numeric.hpp"

namespace rsb {

namespace {

// Odd numbers per segment; 256 KiB of flags.
constexpr std::uint64_t kSegmentOdds = 1U << 18;

std::uint64_t estimated_table_bytes(std::uint64_t limit) {
  if (limit < 17) return 20 * 8;
  const double x = static_cast<double>(limit);
  const double count = 1.25506 * x / std::log(x);
  return static_cast<std::uint64_t>(count * 20.0) + 64;
}

std::vector<std::uint32_t> small_primes_upto(std::uint32_t n) {
  std::vector<char> composite(n + 1, 0);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= n; j += i) composite[j] = 1;
  }
  return out;
}

}  // namespace

void ScaleRange::validate() const {
  if (!(alpha_lo >= 0.0 && alpha_lo < 1.0))
    throw_invalid("alpha_lo must lie in [0,1), got " + std::to_string(alpha_lo));
  if (!(alpha_hi > 0.0 && alpha_hi <= 1.0))
    throw_invalid("alpha_hi must lie in (0,1], got " + std::to_string(alpha_hi));
  if (alpha_lo > alpha_hi) throw_invalid("alpha_lo must not exceed alpha_hi");
  if (!(log_T > std::numbers::e)) throw_invalid("log_T must exceed e, got " + std::to_string(log_T));
}

PrimeWindow ScaleRange::window() const {
  validate();
  PrimeWindow w;
  w.lo_exclusive = alpha_lo == 0.0 ? 1 : scale_cutoff(log_T, alpha_lo);
  w.hi_inclusive = scale_cutoff(log_T, alpha_hi);
  if (alpha_lo == alpha_hi) w.hi_inclusive = w.lo_exclusive;
  return w;
}

PrimeTable::PrimeTable(std::uint64_t limit, std::vector<std::uint32_t> primes)
    : limit_(limit), primes_(std::move(primes)) {
  log_p_.resize(primes_.size());
  inv_sqrt_p_.resize(primes_.size());
  for (std::size_t i = 0; i < primes_.size(); ++i) {
    const double p = static_cast<double>(primes_[i]);
    log_p_[i] = std::log(p);
    inv_sqrt_p_[i] = 1.0 / std::sqrt(p);
  }
}

IndexRange PrimeTable::indices(const PrimeWindow& window) const {
  if (window.empty()) return {};
  if (window.hi_inclusive > limit_)
    throw_coverage("window reaches p <= " + std::to_string(window.hi_inclusive) +
                   " but the table only covers p <= " + std::to_string(limit_));
  auto lo = std::upper_bound(primes_.begin(), primes_.end(), window.lo_exclusive);
  auto hi = std::upper_bound(primes_.begin(), primes_.end(), window.hi_inclusive);
  return {static_cast<std::size_t>(lo - primes_.begin()), static_cast<std::size_t>(hi - primes_.begin())};
}

std::size_t PrimeTable::index_of(std::uint64_t p) const {
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it == primes_.end() || *it != p)
    throw_invalid(std::to_string(p) + " is not a prime in the table (limit " + std::to_string(limit_) + ")");
  return static_cast<std::size_t>(it - primes_.begin());
}

PrimeTable sieve_primes(std::uint64_t limit, const SieveLimits& limits) {
  if (limit < 2) throw_invalid("sieve limit must be >= 2, got " + std::to_string(limit));
  if (limit > limits.max_limit)
    throw_resource("sieve limit " + std::to_string(limit) + " exceeds cap " + std::to_string(limits.max_limit));
  if (estimated_table_bytes(limit) > limits.memory_budget_bytes)
    throw_resource("sieve limit " + std::to_string(limit) + " needs ~" +
                   std::to_string(estimated_table_bytes(limit)) + " bytes, budget is " +
                   std::to_string(limits.memory_budget_bytes));

  const auto root = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(limit))) + 1;
  const std::vector<std::uint32_t> base = small_primes_upto(root);

  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(1.26 * static_cast<double>(limit) /
                                       std::max(1.0, std::log(static_cast<double>(limit)))) + 8);
  out.push_back(2);

  // Segment k covers odd numbers 2j+1 for j in [j0, j0 + kSegmentOdds).
  std::vector<char> flags(kSegmentOdds);
  const std::uint64_t j_end = (limit - 1) / 2 + 1;  // odd numbers 1..limit
  std::vector<std::uint64_t> next_j(base.size(), 0);
  for (std::size_t b = 1; b < base.size(); ++b) {
    const std::uint64_t p = base[b];
    next_j[b] = (p * p - 1) / 2;
  }
  for (std::uint64_t j0 = 0; j0 < j_end; j0 += kSegmentOdds) {
    const std::uint64_t len = std::min(kSegmentOdds, j_end - j0);
    std::fill(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(len), 1);
    if (j0 == 0) flags[0] = 0;  // 1 is not prime
    const std::uint64_t j_hi = j0 + len;
    for (std::size_t b = 1; b < base.size(); ++b) {
      const std::uint64_t p = base[b];
      std::uint64_t j = next_j[b];
      for (; j < j_hi; j += p) flags[j - j0] = 0;
      next_j[b] = j;
    }
    for (std::uint64_t k = 0; k < len; ++k) {
      if (flags[k]) out.push_back(static_cast<std::uint32_t>(2 * (j0 + k) + 1));
    }
  }
  out.shrink_to_fit();
  return PrimeTable(limit, std::move(out));
}

std::uint64_t scale_cutoff(double log_T, double alpha, std::uint64_t cap) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw_invalid("alpha must lie in (0,1], got " + std::to_string(alpha));
  if (!(log_T > 1.0)) throw_invalid("log_T must exceed 1, got " + std::to_string(log_T));
  const double x = std::exp(std::pow(log_T, alpha));
  if (!(x < static_cast<double>(cap) + 1.0))
    throw_resource("cutoff exp((log T)^alpha) = " + std::to_string(x) + " exceeds cap " + std::to_string(cap));
  const double nearest = std::round(x);
  const double snapped = std::abs(x - nearest) <= 1e-12 * x ? nearest : std::floor(x);
  const auto out = static_cast<std::uint64_t>(snapped);
  if (out > cap) throw_resource("cutoff " + std::to_string(out) + " exceeds cap " + std::to_string(cap));
  return out;
}

double prime_reciprocal_sum(const PrimeTable& table, const PrimeWindow& window) {
  const IndexRange r = table.indices(window);
  const auto primes = table.primes();
  CompensatedSum s;
  for (std::size_t i = r.begin; i < r.end; ++i) s.add(1.0 / static_cast<double>(primes[i]));
  return s.value();
}

double prime_reciprocal_sum(const PrimeTable& table, const ScaleRange& range) {
  return prime_reciprocal_sum(table, range.window());
}

double cosine_prime_sum(const PrimeTable& table, const PrimeWindow& window, double delta) {
  if (!std::isfinite(delta) || delta < 0.0) throw_invalid("delta must be finite and >= 0");
  const IndexRange r = table.indices(window);
  const auto primes = table.primes();
  const auto log_p = table.log_p();
  CompensatedSum s;
  for (std::size_t i = r.begin; i < r.end; ++i)
    s.add(std::cos(delta * log_p[i]) / static_cast<double>(primes[i]));
  return s.value();
}

double cosine_prime_sum(const PrimeTable& table, const ScaleRange& range, double delta) {
  return cosine_prime_sum(table, range.window(), delta);
}

}  // namespace rsb
