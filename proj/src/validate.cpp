#include "rsb/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsb/error.hpp"
#include "rsb/field.hpp"
#include "rsb/gibbs.hpp"
#include "rsb/kernels.hpp"
#include "rsb/oracle.hpp"
#include "rsb/spectrum.hpp"
#include "rsb/theory.hpp"

namespace rsb {

namespace {

using json = nlohmann::ordered_json;

constexpr double kContinuityOffset = 1e-8;

ValidationCheck theory_consistency() {
  double max_gap = 0.0;
  double max_jump = 0.0;
  double max_du_gap = 0.0;
  double max_estar = 0.0;
  std::size_t points = 0;
  for (double alpha : {0.2, 0.5, 0.8}) {
    for (double u : {-0.5, -0.2, 0.0, 0.2, 0.5}) {
      for (int b = 1; b <= 12; ++b) {
        const theory::TheoryPoint p{0.5 * b, alpha, u, std::nullopt};
        const double lim = theory::limiting_free_energy(p);
        const double var = theory::variational_free_energy(p, 4000).value;
        max_gap = std::max(max_gap, std::abs(lim - var));
        ++points;
      }
      const double gs = theory::gamma_star(alpha, u);
      max_estar = std::max(max_estar, std::abs(theory::high_points_exponent_closed(gs, alpha, u) + 1.0));
      if (u >= 0.0) {
        const double gc = theory::gamma_c(alpha, u);
        if (gc < gs) {
          const double lo = gc - kContinuityOffset;
          const double hi = gc + kContinuityOffset;
          max_jump = std::max(max_jump, std::abs(theory::high_points_exponent_closed(lo, alpha, u) -
                                                 theory::high_points_exponent_closed(hi, alpha, u)));
          max_jump = std::max(max_jump,
                              std::abs(theory::lambda_star(lo, alpha, u) - theory::lambda_star(hi, alpha, u)));
        }
      }
    }
    for (int b = 1; b <= 12; ++b) {
      const double beta = 0.5 * b;
      const theory::TheoryPoint left{beta, alpha, -kContinuityOffset, std::nullopt};
      const theory::TheoryPoint right{beta, alpha, kContinuityOffset, std::nullopt};
      max_jump = std::max(max_jump,
                          std::abs(theory::limiting_free_energy(left) - theory::limiting_free_energy(right)));
      const theory::TheoryPoint zero{beta, alpha, 0.0, std::nullopt};
      max_du_gap = std::max(max_du_gap, std::abs(theory::du_limiting_free_energy(zero, theory::Side::Left) -
                                                 theory::du_limiting_free_energy(zero, theory::Side::Right)));
    }
  }
  for (double sigma : {0.5, 1.0, 1.3}) {
    const double bc = 2.0 / sigma;
    max_jump = std::max(max_jump, std::abs(theory::f_sigma(bc - kContinuityOffset, sigma) -
                                           theory::f_sigma(bc + kContinuityOffset, sigma)));
  }
  ValidationCheck c{"theory_consistency", false, json::object()};
  c.measured["grid_points"] = points;
  c.measured["max_variational_gap"] = max_gap;
  c.measured["max_continuity_jump"] = max_jump;
  c.measured["max_du_one_sided_gap"] = max_du_gap;
  c.measured["max_exponent_at_gamma_star_error"] = max_estar;
  c.passed = max_gap <= 1e-6 && max_jump <= 1e-6 && max_du_gap <= 1e-6 && max_estar <= 1e-9;
  return c;
}

ValidationCheck pipeline_identity() {
  double worst = 0.0;
  for (double alpha : {0.2, 0.5, 0.8}) {
    for (double beta : {3.0, 4.0, 6.0}) {
      const theory::TheoryPoint p{beta, alpha, 0.0, std::nullopt};
      const double lhs = 2.0 / (beta * beta) * theory::du_limiting_free_energy(p, theory::Side::Right);
      worst = std::max(worst, std::abs(lhs - 2.0 * alpha / beta));
    }
  }
  ValidationCheck c{"overlap_pipeline_identity", worst <= 1e-9, json::object()};
  c.measured["max_error"] = worst;
  return c;
}

ValidationCheck prime_sums(const PrimeTable& table) {
  const std::size_t count = table.indices(PrimeWindow{1, 1'000'000}).size();
  const ScaleRange whole{0.0, 1.0, std::log(1e6)};
  const ScaleRange lo{0.0, 0.5, whole.log_T};
  const ScaleRange hi{0.5, 1.0, whole.log_T};
  const double split_gap =
      std::abs(prime_reciprocal_sum(table, lo) + prime_reciprocal_sum(table, hi) - prime_reciprocal_sum(table, whole));
  const double small = prime_reciprocal_sum(table, PrimeWindow{1, 10});
  ValidationCheck c{"prime_sums", false, json::object()};
  c.measured["prime_count_1e6"] = count;
  c.measured["split_additivity_gap"] = split_gap;
  c.measured["reciprocal_sum_to_10"] = small;
  c.passed = count == 78498 && split_gap <= 1e-12 && std::abs(small - 247.0 / 210.0) <= 1e-15;
  return c;
}

ValidationCheck mgf_identities(const PrimeTable& table) {
  const PrimeWindow w{1, 1000};
  double sym_gap = 0.0;
  for (double l : {0.0, 0.5, 1.0, 2.0})
    for (double lp : {0.0, 0.5, 1.0})
      sym_gap = std::max(sym_gap, std::abs(oracle::mgf_product_formula(l, lp, 0.1, 0.4, table, w) -
                                           oracle::mgf_product_formula(lp, l, 0.4, 0.1, table, w)));
  constexpr double s = 1e-3;
  const double lp = std::log(oracle::mgf_product_formula(s, 0.0, 0.0, 0.0, table, w));
  const double lm = std::log(oracle::mgf_product_formula(-s, 0.0, 0.0, 0.0, table, w));
  const double second = (lp + lm) / (s * s);
  const double variance = 0.5 * prime_reciprocal_sum(table, w);
  const double rel = std::abs(second - variance) / variance;
  ValidationCheck c{"mgf_identities", false, json::object()};
  c.measured["symmetry_gap"] = sym_gap;
  c.measured["second_derivative"] = second;
  c.measured["variance"] = variance;
  c.measured["relative_error"] = rel;
  c.passed = sym_gap == 0.0 && rel <= 1e-6;
  return c;
}

ValidationCheck mgf_monte_carlo(const PrimeTable& table, std::uint64_t seed) {
  const PrimeWindow toy{1, 7};
  constexpr std::size_t kDraws = 20000;
  json rows = json::array();
  bool ok = true;
  for (double delta : {0.0, 0.3, 1.0}) {
    for (double l : {0.0, 0.5, 1.0}) {
      for (double lp : {0.0, 0.5, 1.0}) {
        const double exact = oracle::mgf_product_formula(l, lp, 0.0, delta, table, toy);
        const oracle::McEstimate mc = oracle::mgf_monte_carlo(l, lp, 0.0, delta, table, toy, kDraws, seed);
        const double z = mc.std_error > 0.0 ? std::abs(mc.mean - exact) / mc.std_error
                                            : (mc.mean == exact ? 0.0 : INFINITY);
        ok = ok && z <= 3.0;
        rows.push_back({{"delta", delta}, {"lambda", l}, {"lambda_prime", lp}, {"exact", exact},
                        {"monte_carlo", mc.mean}, {"std_error", mc.std_error}, {"z", z}});
      }
    }
  }
  ValidationCheck c{"mgf_monte_carlo", ok, json::object()};
  c.measured["draws"] = kDraws;
  c.measured["points"] = rows;
  return c;
}

ValidationCheck covariance(const PrimeTable& table, std::uint64_t seed, unsigned workers) {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e4), 0.5, 8, seed);
  constexpr std::size_t kReplicas = 2000;
  const auto samples = sample_ensemble(cfg, table, kReplicas, workers);
  const oracle::CovarianceCheck cc =
      oracle::covariance_check(samples, table, ScaleRange{0.0, 1.0, cfg.log_T}.window());
  ValidationCheck c{"covariance", cc.fraction_within >= 0.95, json::object()};
  c.measured["log_T"] = cfg.log_T;
  c.measured["grid_size"] = cfg.grid_size;
  c.measured["replicas"] = kReplicas;
  c.measured["pairs_tested"] = cc.pairs_tested;
  c.measured["fraction_within_3se"] = cc.fraction_within;
  c.measured["worst_z"] = cc.worst_z;
  return c;
}

ValidationCheck integration_by_parts() {
  const oracle::IbpResult lin = oracle::integration_by_parts_residual(oracle::TestFunction::Linear, 1.0);
  const oracle::IbpResult poly = oracle::integration_by_parts_residual(oracle::TestFunction::Polynomial, 0.0);
  const oracle::IbpResult ex = oracle::integration_by_parts_residual(oracle::TestFunction::Exponential, 0.5);
  ValidationCheck c{"integration_by_parts", false, json::object()};
  c.measured["linear_residual"] = lin.residual;
  c.measured["polynomial_residual"] = poly.residual;
  c.measured["exponential_residual"] = ex.residual;
  c.measured["exponential_bound"] = ex.bound;
  c.passed = lin.residual <= 1e-12 && poly.residual <= 1e-12 && ex.residual <= ex.bound;
  return c;
}

ValidationCheck single_prime(const PrimeTable& table, std::uint64_t seed, unsigned workers) {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e3), 0.5, 8, seed);
  constexpr std::size_t kReplicas = 20000;
  json rows = json::array();
  bool ok = true;
  for (std::uint64_t p : {2, 3, 5}) {
    const oracle::SinglePrimeCheck r = oracle::single_prime_derivative_check(p, 2.0, cfg, table, kReplicas, workers);
    ok = ok && r.pass;
    rows.push_back({{"prime", p}, {"beta", r.beta}, {"derivative", r.derivative}, {"overlap_side", r.overlap_side},
                    {"difference", r.difference}, {"combined_se", r.combined_se}, {"allowance", r.allowance},
                    {"pass", r.pass}});
  }
  ValidationCheck c{"single_prime_derivative", ok, json::object()};
  c.measured["log_T"] = cfg.log_T;
  c.measured["replicas"] = kReplicas;
  c.measured["primes"] = rows;
  return c;
}

ValidationCheck fubini(const PrimeTable& table, std::uint64_t seed, unsigned workers) {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e4), 0.5, 8, seed);
  constexpr std::size_t kReplicas = 200;
  const auto samples = sample_ensemble(cfg, table, kReplicas, workers);
  const OverlapTable ot = OverlapTable::for_log_T(table, cfg.log_T, cfg.grid_size);
  std::vector<OverlapHistogram> parts;
  for (std::size_t r = 0; r < samples.size(); ++r)
    parts.push_back(sample_overlap_pairs(gibbs_weights(samples[r].full(), 4.0), ot, kDefaultPairsPerReplica, seed, r));
  const OverlapHistogram h = merge_overlap_histograms(parts);
  const FubiniCheck fc = overlap_cdf_integral(h, cfg.alpha);
  ValidationCheck c{"fubini_identity", fc.agree, json::object()};
  c.measured["via_cdf"] = fc.via_cdf;
  c.measured["via_identity"] = fc.via_identity;
  c.measured["tolerance"] = fc.tolerance;
  c.measured["pairs"] = h.pair_count;
  return c;
}

ValidationCheck tails(const PrimeTable& table, std::uint64_t seed, unsigned workers) {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e6), 0.5, 8, seed);
  const ScaleRange range{0.5, 1.0, cfg.log_T};
  constexpr std::size_t kReplicas = 1000;
  constexpr double kGamma = 0.7;
  constexpr double kPairGamma = 0.25;
  const oracle::TailReport t = oracle::tail_bound_check(range, kGamma, cfg, table, kReplicas, workers, 0.5);
  const oracle::TailReport pair = oracle::tail_bound_check(range, kPairGamma, cfg, table, kReplicas, workers, 0.5);
  const oracle::SmoothingReport s = oracle::smoothing_check(range, kGamma, cfg, table, kReplicas, workers);
  const oracle::TailReport near = oracle::tail_bound_check(range, 1e-6, cfg, table, kReplicas, workers, 0.5);
  const bool ratio_ok = !pair.pair_inconclusive && pair.factorization_ratio + 3.0 * pair.ratio_se >= 0.5 &&
                        pair.factorization_ratio - 3.0 * pair.ratio_se <= 2.0;
  const bool point_ok = t.inconclusive || t.within_bound;
  const bool smooth_ok = s.inconclusive || s.ratio <= oracle::kSmoothingFactor;
  const bool half_ok = std::abs(near.empirical_prob - 0.5) <= 3.0 * near.empirical_se + 0.02;
  ValidationCheck c{"tail_bounds", point_ok && ratio_ok && smooth_ok && half_ok, json::object()};
  c.measured["alpha_lo"] = range.alpha_lo;
  c.measured["alpha_hi"] = range.alpha_hi;
  c.measured["log_T"] = range.log_T;
  c.measured["gamma"] = kGamma;
  c.measured["threshold"] = t.threshold;
  c.measured["empirical_prob"] = t.empirical_prob;
  c.measured["empirical_se"] = t.empirical_se;
  c.measured["bound"] = t.bound;
  c.measured["inconclusive"] = t.inconclusive;
  c.measured["pair_gamma"] = kPairGamma;
  c.measured["pair_distance"] = pair.pair_distance;
  c.measured["pair_regime"] = pair.pair_regime;
  c.measured["joint_prob"] = pair.joint_prob;
  c.measured["factorization_ratio"] = pair.factorization_ratio;
  c.measured["ratio_se"] = pair.ratio_se;
  c.measured["smoothing_points_per_block"] = s.points_per_block;
  c.measured["smoothing_ratio"] = s.ratio;
  c.measured["near_zero_prob"] = near.empirical_prob;
  return c;
}

ValidationCheck max_far(const PrimeTable& table, std::uint64_t seed, unsigned workers) {
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e4), 0.5, 8, seed);
  const oracle::MaxCheck m = oracle::max_field_check(cfg, table, 0.0, 10.0, 200, workers);
  ValidationCheck c{"max_far_threshold", m.probability == 0.0, json::object()};
  c.measured["threshold"] = m.threshold;
  c.measured["probability"] = m.probability;
  return c;
}

ValidationCheck kernel_equivalence(std::uint64_t seed) {
  ValidationCheck c{"kernel_equivalence", false, json::object()};
  if (!kernels::isa_supported(kernels::Isa::Avx2)) {
    c.passed = true;
    c.measured["skipped"] = true;
    return c;
  }
  constexpr std::size_t kCount = 4099;
  std::vector<double> re_s(kCount), im_s(kCount), re_v(kCount), im_v(kCount);
  std::size_t mismatched = 0;
  for (std::uint64_t first : {0, 1, 12345}) {
    kernels::unit_phasors(kernels::Isa::Scalar, seed, 7, first, re_s, im_s);
    kernels::unit_phasors(kernels::Isa::Avx2, seed, 7, first, re_v, im_v);
    for (std::size_t i = 0; i < kCount; ++i) mismatched += re_s[i] != re_v[i] || im_s[i] != im_v[i];
  }
  std::vector<double> omega(kCount), weight(kCount);
  for (std::size_t i = 0; i < kCount; ++i) {
    omega[i] = 10.0 + 0.0625 * static_cast<double>(i) / kCount;
    weight[i] = 1.0 / std::sqrt(static_cast<double>(i + 2));
  }
  kernels::Moments sr{}, si{}, vr{}, vi{};
  kernels::accumulate_moments(kernels::Isa::Scalar, omega, weight, re_s, im_s, 10.03125, sr, si);
  kernels::accumulate_moments(kernels::Isa::Avx2, omega, weight, re_s, im_s, 10.03125, vr, vi);
  double worst = 0.0;
  for (std::size_t k = 0; k < sr.size(); ++k) {
    const double scale = std::max({std::abs(sr[k]), std::abs(si[k]), 1e-300});
    worst = std::max({worst, std::abs(sr[k] - vr[k]) / scale, std::abs(si[k] - vi[k]) / scale});
  }
  c.measured["phasor_mismatches"] = mismatched;
  c.measured["moment_max_relative_gap"] = worst;
  c.passed = mismatched == 0 && worst <= 1e-12;
  return c;
}

ValidationCheck field_paths(const PrimeTable& table, std::uint64_t seed) {
  const double log_T = std::log(1e6);
  const ScaleRange lo{0.0, 0.5, log_T};
  const ScaleRange hi{0.5, 1.0, log_T};
  const std::size_t n = FieldConfig::min_grid_size(log_T, 8);
  const FieldSampler binned(table, table.indices(lo.window()), table.indices(hi.window()), midpoint_grid(n), seed,
                            FieldPath::Binned);
  const FieldSampler direct(table, table.indices(lo.window()), table.indices(hi.window()), midpoint_grid(n), seed,
                            FieldPath::Direct);
  std::vector<double> a(n), b(n), x(n), y(n);
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 4; ++r) {
    binned.sample(r, a, b);
    direct.sample(r, x, y);
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(a[i] - x[i]) / std::max(1.0, std::abs(x[i])));
      worst = std::max(worst, std::abs(b[i] - y[i]) / std::max(1.0, std::abs(y[i])));
    }
  }
  ValidationCheck c{"field_paths", worst <= 1e-9, json::object()};
  c.measured["max_relative_gap"] = worst;
  return c;
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

std::string ValidationReport::to_json() const {
  json j;
  j["version"] = RSB_VERSION;
  j["seed"] = seed;
  j["passed"] = passed();
  json arr = json::array();
  for (const ValidationCheck& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

ValidationReport run_validation_suite(const PrimeTable& table, std::uint64_t seed, unsigned workers) {
  if (table.limit() < kValidationPrimeLimit)
    throw_coverage("validation needs primes up to " + std::to_string(kValidationPrimeLimit));
  ValidationReport rep;
  rep.seed = seed;
  rep.checks.push_back(theory_consistency());
  rep.checks.push_back(pipeline_identity());
  rep.checks.push_back(prime_sums(table));
  rep.checks.push_back(mgf_identities(table));
  rep.checks.push_back(mgf_monte_carlo(table, seed));
  rep.checks.push_back(integration_by_parts());
  rep.checks.push_back(kernel_equivalence(seed));
  rep.checks.push_back(field_paths(table, seed));
  rep.checks.push_back(covariance(table, seed, workers));
  rep.checks.push_back(single_prime(table, seed, workers));
  rep.checks.push_back(fubini(table, seed, workers));
  rep.checks.push_back(tails(table, seed, workers));
  rep.checks.push_back(max_far(table, seed, workers));
  return rep;
}

}  // namespace rsb
