#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsb/primes.hpp"

namespace rsb {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  nlohmann::ordered_json measured;
};

struct ValidationReport {
  std::uint64_t seed = 0;
  std::vector<ValidationCheck> checks;

  bool passed() const;
  /// Deterministic JSON text: no timestamps, no worker count.
  std::string to_json() const;
};

/// The table must cover primes up to 10^6.
inline constexpr std::uint64_t kValidationPrimeLimit = 1'000'000;

/// Runs every oracle check. Results depend only on seed, never on workers.
ValidationReport run_validation_suite(const PrimeTable& table, std::uint64_t seed, unsigned workers = 1);

}  // namespace rsb
