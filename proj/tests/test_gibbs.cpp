#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsb/error.hpp"
#include "rsb/field.hpp"
#include "rsb/gibbs.hpp"
#include "rsb/primes.hpp"

using namespace rsb;

namespace {

const PrimeTable& table_1e6() {
  static const PrimeTable t = sieve_primes(1'000'000);
  return t;
}

}  // namespace

TEST_CASE("constant field") {
  const std::vector<double> v(10, 1.7);
  const GibbsWeights g = gibbs_weights(v, 2.5);
  for (double w : g.weights) CHECK(w == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.log_Z == doctest::Approx(2.5 * 1.7).epsilon(1e-15));
  CHECK(log_partition(v, 2.5) == doctest::Approx(g.log_Z).epsilon(1e-15));
}

TEST_CASE("two points") {
  const double beta = 3.0;
  const std::vector<double> v{0.0, std::log(2.0) / beta};
  const GibbsWeights g = gibbs_weights(v, beta);
  CHECK(g.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("large beta without overflow") {
  std::vector<double> v(50, 0.0);
  v[17] = 10.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (i != 17) v[i] = 0.1 * static_cast<double>(i % 7);
  const GibbsWeights g = gibbs_weights(v, 50.0);
  CHECK(g.weights[17] >= 1.0 - 1e-200);
  CHECK(std::isfinite(g.log_Z));
  const std::vector<double> huge{800.0, 799.0};
  CHECK(std::isfinite(log_partition(huge, 5.0)));
}

TEST_CASE("free energy at small beta") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e5), 0.5, 8, 2);
  const FreeEnergyEstimate e = free_energy_estimate(cfg, table_1e6(), 1e-9, 0.0, 50);
  CHECK(std::abs(e.mean) < 1e-8);
  CHECK_THROWS_AS(free_energy_estimate(cfg, table_1e6(), 1.0, 0.0, 1), Error);
}

TEST_CASE("log partition is convex in u per replica") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e5), 0.5, 8, 2);
  const auto samples = sample_ensemble(cfg, table_1e6(), 20);
  for (const auto& s : samples) {
    const double a = log_partition(perturb(s, -0.2).values, 3.0);
    const double b = log_partition(perturb(s, 0.0).values, 3.0);
    const double c = log_partition(perturb(s, 0.2).values, 3.0);
    CHECK(a + c - 2.0 * b >= -1e-12);
  }
}

TEST_CASE("derivative vanishes when low part is zero") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e5), 0.5, 8, 2);
  auto samples = sample_ensemble(cfg, table_1e6(), 20);
  for (auto& s : samples) std::fill(s.low.begin(), s.low.end(), 0.0);
  const DerivativeEstimate d = du_free_energy_from_samples(samples, 2.0, 0.05);
  CHECK(d.value == 0.0);
}

TEST_CASE("difference quotients at two steps agree") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e6), 0.5, 8, 8);
  const auto samples = sample_ensemble(cfg, table_1e6(), 400, 4);
  const DerivativeEstimate a = du_free_energy_from_samples(samples, 4.0, 0.05);
  const DerivativeEstimate b = du_free_energy_from_samples(samples, 4.0, 0.025);
  CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.std_error, b.std_error));
  CHECK_THROWS_AS(du_free_energy_from_samples(samples, 4.0, 0.5), Error);
}

TEST_CASE("point mass histogram") {
  const PrimeTable& t = table_1e6();
  const std::size_t n = 32;
  const OverlapTable ot = OverlapTable::for_log_T(t, std::log(1e6), n);
  GibbsWeights g;
  g.weights.assign(n, 0.0);
  g.weights[5] = 1.0;
  g.beta = 1.0;
  const OverlapHistogram h = sample_overlap_pairs(g, ot, 100, 1, 0);
  CHECK(h.masses.back() == 1.0);
  const OverlapHistogram e = enumerate_overlap_law(g, ot);
  CHECK(e.masses.back() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("uniform weights match brute-force enumeration") {
  const PrimeTable& t = table_1e6();
  const std::size_t n = 111;
  const OverlapTable ot = OverlapTable::for_log_T(t, std::log(1e6), n);
  GibbsWeights g;
  g.weights.assign(n, 1.0 / n);
  g.beta = 0.0;
  const OverlapHistogram e = enumerate_overlap_law(g, ot);
  std::vector<double> brute(e.bins(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      brute[e.bin_of(overlap_rho((i + 0.5) / n, (j + 0.5) / n, t, std::log(1e6)))] += 1.0 / (n * n);
  for (std::size_t b = 0; b < e.bins(); ++b) CHECK(e.masses[b] == doctest::Approx(brute[b]).epsilon(1e-12));

  // Sampled pairs converge to the enumerated law.
  std::vector<OverlapHistogram> parts;
  for (std::uint64_t r = 0; r < 50; ++r) parts.push_back(sample_overlap_pairs(g, ot, 2000, 3, r));
  const OverlapHistogram m = merge_overlap_histograms(parts);
  double total = 0.0;
  for (std::size_t b = 0; b < m.bins(); ++b) {
    total += m.masses[b];
    const double se = std::sqrt(e.masses[b] * (1.0 - e.masses[b]) / 100000.0);
    CHECK(std::abs(m.masses[b] - e.masses[b]) <= 5.0 * se + 1e-12);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.pair_count == 100000);
}

TEST_CASE("histogram layout") {
  const OverlapHistogram h = make_overlap_histogram();
  CHECK(h.bins() == 40);
  CHECK(h.bin_edges.front() == -1.0);
  CHECK(h.bin_edges.back() == 1.0);
  CHECK(h.bin_edges[20] == 0.0);
  CHECK(h.bin_of(1.0) == 39);
  CHECK(h.bin_of(0.0) == 20);
  CHECK(h.bin_of(-1.0) == 0);
}

TEST_CASE("fubini identity") {
  OverlapHistogram one = make_overlap_histogram();
  one.masses.back() = 1.0;
  one.samples = {1.0};
  FubiniCheck f = overlap_cdf_integral(one, 0.5);
  CHECK(f.via_identity == 0.0);
  CHECK(f.via_cdf == 0.0);
  CHECK(f.agree);

  OverlapHistogram zero = make_overlap_histogram();
  zero.masses[zero.bin_of(0.0)] = 1.0;
  zero.samples = {0.0, 0.0};
  f = overlap_cdf_integral(zero, 0.5);
  CHECK(f.via_identity == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f.agree);

  OverlapHistogram uni = make_overlap_histogram();
  for (std::size_t b = 20; b < 40; ++b) uni.masses[b] = 0.05;
  f = overlap_cdf_integral(uni, 0.5);
  CHECK(f.via_cdf == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(f.via_identity == doctest::Approx(0.125).epsilon(1e-12));
}
