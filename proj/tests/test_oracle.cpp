#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsb/error.hpp"
#include "rsb/field.hpp"
#include "rsb/gibbs.hpp"
#include "rsb/oracle.hpp"
#include "rsb/primes.hpp"
#include "rsb/theory.hpp"

using namespace rsb;
using namespace rsb::oracle;

namespace {

const PrimeTable& table_1e6() {
  static const PrimeTable t = sieve_primes(1'000'000);
  return t;
}

}  // namespace

TEST_CASE("mgf series factor") {
  CHECK(mgf_prime_factor(0.0) == 1.0);
  // sum x^m / (m!)^2 = I_0(2 sqrt x)
  CHECK(mgf_prime_factor(0.25) == doctest::Approx(std::cyl_bessel_i(0.0, 1.0)).epsilon(1e-15));
  CHECK(mgf_prime_factor(4.0) == doctest::Approx(std::cyl_bessel_i(0.0, 4.0)).epsilon(1e-14));
}

TEST_CASE("mgf product formula") {
  const PrimeTable& t = table_1e6();
  const PrimeWindow toy{1, 7};
  CHECK(mgf_product_formula(0.0, 0.0, 0.1, 0.9, t, toy) == 1.0);
  CHECK(mgf_product_formula(0.7, 0.4, 0.3, 0.3, t, toy) ==
        doctest::Approx(mgf_product_formula(1.1, 0.0, 0.3, 0.3, t, toy)).epsilon(1e-14));
  CHECK(mgf_product_formula(0.7, 0.4, 0.2, 0.5, t, toy) == mgf_product_formula(0.4, 0.7, 0.5, 0.2, t, toy));
  CHECK(mgf_product_formula(1.3, 0.0, 0.0, 0.0, t, PrimeWindow{1, 1000}) >= 1.0);
  CHECK_THROWS_AS(mgf_product_formula(9.0, 0.0, 0.0, 0.0, t, toy), Error);
}

TEST_CASE("mgf monte carlo on four primes") {
  const PrimeTable& t = table_1e6();
  const PrimeWindow toy{1, 7};
  const double exact = mgf_product_formula(1.0, 0.0, 0.0, 0.0, t, toy);
  const McEstimate mc = mgf_monte_carlo(1.0, 0.0, 0.0, 0.0, t, toy, 1'000'000, 17);
  CHECK(std::abs(mc.mean - exact) <= 3.0 * mc.std_error);
  for (double d : {0.3, 1.0, 2.5}) {
    const double ex = mgf_product_formula(0.5, 1.0, 0.0, d, t, toy);
    const McEstimate m = mgf_monte_carlo(0.5, 1.0, 0.0, d, t, toy, 200'000, 18);
    CHECK(std::abs(m.mean - ex) <= 3.0 * m.std_error);
  }
}

TEST_CASE("mgf second derivative is the variance") {
  const PrimeTable& t = table_1e6();
  const PrimeWindow w{1, 100'000};
  const double s = 1e-3;
  const double second = (std::log(mgf_product_formula(s, 0.0, 0.0, 0.0, t, w)) +
                         std::log(mgf_product_formula(-s, 0.0, 0.0, 0.0, t, w))) /
                        (s * s);
  CHECK(second == doctest::Approx(0.5 * prime_reciprocal_sum(t, w)).epsilon(1e-6));
}

TEST_CASE("integration by parts") {
  CHECK(integration_by_parts_residual(TestFunction::Linear, 1.0).residual <= 1e-12);
  CHECK(integration_by_parts_residual(TestFunction::Linear, -3.5).residual <= 1e-12);
  CHECK(integration_by_parts_residual(TestFunction::Polynomial, 0.0).residual <= 1e-12);
  const IbpResult e = integration_by_parts_residual(TestFunction::Exponential, 0.5);
  CHECK(e.residual > 0.0);
  CHECK(e.residual <= e.bound);
  CHECK(parse_test_function("exponential") == TestFunction::Exponential);
  CHECK_THROWS_AS(parse_test_function("cubic"), Error);
}

TEST_CASE("single prime check degenerate cases") {
  const PrimeTable& t = table_1e6();
  const double L = std::log(1e3);
  const IndexRange lo = t.indices(ScaleRange{0.0, 0.5, L}.window());
  const IndexRange hi = t.indices(ScaleRange{0.5, 1.0, L}.window());
  const FieldSampler one(t, lo, hi, midpoint_grid(1), 4);
  const SinglePrimeCheck r = single_prime_derivative_check(3, 2.0, one, 50);
  // One grid point: log Z = beta v, so only the mean of the derivative vanishes.
  CHECK(std::abs(r.derivative) <= 3.0 * r.combined_se);
  CHECK(std::abs(r.overlap_side) <= 1e-15);

  const FieldConfig cfg = FieldConfig::with_min_grid(L, 0.5, 8, 4);
  const SinglePrimeCheck cold = single_prime_derivative_check(2, 1e-6, cfg, t, 50);
  CHECK(std::abs(cold.derivative) <= 3.0 * cold.combined_se + 1e-12);
  CHECK(cold.combined_se <= 1e-6);
  CHECK(std::abs(cold.overlap_side) <= 1e-12);

  CHECK_THROWS_AS(single_prime_derivative_check(4, 2.0, cfg, t, 10), Error);
  CHECK_THROWS_AS(single_prime_derivative_check(1009, 2.0, cfg, t, 10), Error);
}

TEST_CASE("single prime identity at p = 2") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e3), 0.5, 8, 11);
  const SinglePrimeCheck r = single_prime_derivative_check(2, 2.0, cfg, table_1e6(), 100'000, 4);
  CHECK(r.pass);
  CHECK(r.allowance == doctest::Approx(kSinglePrimeC * std::pow(2.0, -1.5)));
}

TEST_CASE("tail bound and factorization") {
  const PrimeTable& t = table_1e6();
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e6), 0.5, 8, 5);
  const ScaleRange range{0.5, 1.0, cfg.log_T};
  const TailReport r = tail_bound_check(range, 0.7, cfg, t, 1000, 4);
  CHECK_FALSE(r.inconclusive);
  CHECK(r.empirical_prob * r.samples > 500);
  CHECK(r.empirical_prob <= r.bound);
  const TailReport near = tail_bound_check(range, 1e-6, cfg, t, 1000, 4);
  CHECK(std::abs(near.empirical_prob - 0.5) <= 3.0 * near.empirical_se + 0.02);
  const TailReport pair = tail_bound_check(range, 0.25, cfg, t, 1000, 4);
  CHECK(pair.pair_regime);
  CHECK(pair.factorization_ratio + 3.0 * pair.ratio_se >= 0.5);
  CHECK(pair.factorization_ratio - 3.0 * pair.ratio_se <= 2.0);
  const TailReport rare = tail_bound_check(range, 1.0, cfg, t, 2, 1);
  CHECK(rare.inconclusive);
  CHECK_THROWS_AS(tail_bound_check(range, 1.5, cfg, t, 10), Error);
}

TEST_CASE("smoothing") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e6), 0.5, 8, 5);
  const SmoothingReport s = smoothing_check(ScaleRange{0.5, 1.0, cfg.log_T}, 0.7, cfg, table_1e6(), 500, 4);
  CHECK_FALSE(s.inconclusive);
  CHECK(s.ratio >= 1.0);
  CHECK(s.ratio <= kSmoothingFactor);
}

TEST_CASE("maximum checks") {
  const PrimeTable& t = table_1e6();
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e4), 0.5, 8, 6);
  CHECK(max_field_check(cfg, t, 0.0, 10.0, 100).probability == 0.0);
  const auto samples = sample_ensemble(cfg, t, 500, 4);
  const MaxCheck a = max_field_from_samples(samples, 0.0, 0.2);
  const MaxCheck b = max_field_from_samples(samples, -0.9, 0.2);
  CHECK(b.threshold == doctest::Approx(a.threshold * theory::gamma_star(0.5, -0.9)));
  CHECK_THROWS_AS(max_field_from_samples(samples, 0.0, 0.0), Error);
}

TEST_CASE("high points near zero level") {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e6), 0.5, 8, 6);
  const auto samples = sample_ensemble(cfg, table_1e6(), 400, 4);
  const MeasureEstimate m = high_points_from_samples(samples, 0.0, 1e-6);
  CHECK(m.median_measure == doctest::Approx(0.5).epsilon(0.3));
  CHECK(std::abs(m.normalized_log_measure) <= 1.5 * std::log(2.0) / std::log(cfg.log_T));
  CHECK_THROWS_AS(high_points_from_samples(samples, 0.0, 1.0), Error);
}

TEST_CASE("covariance oracle") {
  const PrimeTable& t = table_1e6();
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e4), 0.5, 8, 12);
  const auto samples = sample_ensemble(cfg, t, 2000, 4);
  const CovarianceCheck c = covariance_check(samples, t, PrimeWindow{1, 10'000});
  CHECK(c.fraction_within >= 0.95);
}
