#include "rsb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "rsb/error.hpp"
#include "rsb/gibbs.hpp"
#include "rsb/kernels.hpp"
#include "rsb/numeric.hpp"
#include "rsb/parallel.hpp"
#include "rsb/philox.hpp"
#include "rsb/theory.hpp"

namespace rsb::oracle {

namespace {

void check_lambda(double lambda) {
  if (!(std::abs(lambda) <= kMaxMgfLambda))
    throw_invalid("|lambda| must not exceed " + std::to_string(kMaxMgfLambda) + ", got " + std::to_string(lambda));
}

/// Field values over an index range for explicit phases, summed directly.
double direct_value(const PrimeTable& table, IndexRange r, std::span<const double> c, std::span<const double> s,
                    double h) {
  const auto omega = table.log_p();
  const auto w = table.inv_sqrt_p();
  double acc = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double arg = h * omega[r.begin + k];
    acc += w[r.begin + k] * (c[k] * std::cos(arg) + s[k] * std::sin(arg));
  }
  return acc;
}

FieldSampler increment_sampler(const ScaleRange& range, const FieldConfig& config, const PrimeTable& table) {
  config.validate();
  const IndexRange r = table.indices(range.window());
  return FieldSampler(table, IndexRange{}, r, midpoint_grid(config.grid_size), config.seed);
}

}  // namespace

double mgf_prime_factor(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw_internal("MGF factor argument must be finite and >= 0");
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 10000; ++m) {
    term *= x / (static_cast<double>(m) * static_cast<double>(m));
    sum += term;
    if (term <= 1e-17 * sum) return sum;
  }
  throw_internal("MGF prime factor series did not converge");
}

double mgf_product_formula(double lambda, double lambda_prime, double h, double h_prime, const PrimeTable& table,
                           const PrimeWindow& window) {
  check_lambda(lambda);
  check_lambda(lambda_prime);
  const IndexRange r = table.indices(window);
  const double delta = std::abs(h - h_prime);
  const auto primes = table.primes();
  const auto log_p = table.log_p();
  CompensatedSum log_total;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    const double a = lambda * lambda + lambda_prime * lambda_prime +
                     2.0 * lambda * lambda_prime * std::cos(delta * log_p[i]);
    const double x = std::max(a, 0.0) / (4.0 * static_cast<double>(primes[i]));
    log_total.add(std::log(mgf_prime_factor(x)));
  }
  return std::exp(log_total.value());
}

double mgf_product_formula(double lambda, double lambda_prime, double h, double h_prime, const PrimeTable& table,
                           const ScaleRange& range) {
  return mgf_product_formula(lambda, lambda_prime, h, h_prime, table, range.window());
}

McEstimate mgf_monte_carlo(double lambda, double lambda_prime, double h, double h_prime, const PrimeTable& table,
                           const PrimeWindow& window, std::size_t draws, std::uint64_t seed) {
  check_lambda(lambda);
  check_lambda(lambda_prime);
  if (draws < 2) throw_invalid("Monte Carlo needs at least 2 draws");
  const IndexRange r = table.indices(window);
  std::vector<double> c(r.size());
  std::vector<double> s(r.size());
  std::vector<double> vals(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    kernels::scalar::unit_phasors(seed, stream_id(StreamDomain::Validation, d), r.begin, c, s);
    vals[d] = std::exp(lambda * direct_value(table, r, c, s, h) + lambda_prime * direct_value(table, r, c, s, h_prime));
  }
  const MeanEstimate e = mean_and_se(vals);
  return {e.mean, e.std_error, draws};
}

McEstimate mgf_from_samples(std::span<const FieldSample> samples, double lambda, double lambda_prime,
                            std::size_t lag) {
  check_lambda(lambda);
  check_lambda(lambda_prime);
  if (samples.size() < 2) throw_invalid("need at least 2 replicas");
  const std::size_t n = samples.front().low.size();
  if (lag >= n) throw_invalid("lag must be below the grid size");
  std::vector<double> per_replica(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const std::vector<double> x = samples[r].full();
    CompensatedSum acc;
    for (std::size_t i = 0; i + lag < n; ++i) acc.add(std::exp(lambda * x[i] + lambda_prime * x[i + lag]));
    per_replica[r] = acc.value() / static_cast<double>(n - lag);
  }
  const MeanEstimate e = mean_and_se(per_replica);
  return {e.mean, e.std_error, samples.size()};
}

CovarianceCheck covariance_check(std::span<const FieldSample> samples, const PrimeTable& table,
                                 const PrimeWindow& window, double z_band) {
  if (samples.size() < 2) throw_invalid("need at least 2 replicas");
  const std::size_t n = samples.front().low.size();
  const auto R = static_cast<double>(samples.size());
  const std::vector<double> grid = midpoint_grid(n);
  // Exact covariance by lag (uniform grid).
  std::vector<double> exact(n);
  for (std::size_t k = 0; k < n; ++k) exact[k] = covariance_exact(grid[0], grid[k], table, window);

  // Sums of x_i x_j and (x_i x_j)^2 over replicas; E[X] = 0 is known, so the
  // covariance estimator is the plain mean of products.
  std::vector<double> s1(n * n, 0.0);
  std::vector<double> s2(n * n, 0.0);
  for (const FieldSample& smp : samples) {
    const std::vector<double> x = smp.full();
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      double* r1 = &s1[i * n];
      double* r2 = &s2[i * n];
      for (std::size_t j = i; j < n; ++j) {
        const double prod = xi * x[j];
        r1[j] += prod;
        r2[j] += prod * prod;
      }
    }
  }
  CovarianceCheck out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double mean = s1[i * n + j] / R;
      const double var = std::max(s2[i * n + j] / R - mean * mean, 0.0) * R / (R - 1.0);
      const double se = std::sqrt(var / R);
      const double z = se > 0.0 ? std::abs(mean - exact[j - i]) / se : 0.0;
      ++out.pairs_tested;
      if (z <= z_band) ++out.pairs_within;
      out.worst_z = std::max(out.worst_z, z);
    }
  }
  out.fraction_within = static_cast<double>(out.pairs_within) / static_cast<double>(out.pairs_tested);
  return out;
}

TestFunction parse_test_function(std::string_view name) {
  if (name == "linear") return TestFunction::Linear;
  if (name == "exponential") return TestFunction::Exponential;
  if (name == "polynomial") return TestFunction::Polynomial;
  throw_invalid("unknown test function '" + std::string(name) + "'");
}

IbpResult integration_by_parts_residual(TestFunction fn, double lambda) {
  constexpr std::size_t kAngles = 1U << 14;
  std::complex<double> e_xi_f{0.0, 0.0};
  std::complex<double> e_dzbar{0.0, 0.0};
  double e_abs2 = 0.0;
  for (std::size_t k = 0; k < kAngles; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(kAngles);
    const std::complex<double> xi = std::polar(1.0, phi);
    const std::complex<double> xib = std::conj(xi);
    std::complex<double> f;
    std::complex<double> dzbar;
    switch (fn) {
      case TestFunction::Linear:
        f = lambda * xib;
        dzbar = lambda;
        break;
      case TestFunction::Polynomial:
        f = xib * xib;
        dzbar = 2.0 * xib;
        break;
      case TestFunction::Exponential:
        f = std::exp(lambda * xi + lambda * xib);
        dzbar = lambda * f;
        break;
    }
    e_xi_f += xi * f;
    e_dzbar += dzbar;
    e_abs2 += std::norm(xi);
  }
  const double n = static_cast<double>(kAngles);
  e_xi_f /= n;
  e_dzbar /= n;
  e_abs2 /= n;
  IbpResult out;
  out.residual = std::abs(e_xi_f - e_abs2 * e_dzbar);
  switch (fn) {
    case TestFunction::Linear: out.bound = 0.0; break;
    case TestFunction::Polynomial: out.bound = 2.0; break;
    case TestFunction::Exponential: out.bound = lambda * lambda * std::exp(2.0 * std::abs(lambda)); break;
  }
  return out;
}

SinglePrimeCheck single_prime_derivative_check(std::uint64_t p, double beta, const FieldSampler& sampler,
                                               std::size_t replicas, unsigned workers) {
  if (!(beta > 0.0)) throw_invalid("beta must be > 0");
  if (replicas < 2) throw_invalid("need at least 2 replicas");
  const PrimeTable& table = sampler.table();
  const std::size_t idx = table.index_of(p);
  const IndexRange lo = sampler.low_range();
  const IndexRange hi = sampler.high_range();
  const bool covered = (idx >= lo.begin && idx < lo.end) || (idx >= hi.begin && idx < hi.end);
  if (!covered) throw_invalid("prime " + std::to_string(p) + " is outside the sampled windows");
  const double omega = table.log_p()[idx];
  const double amp = table.inv_sqrt_p()[idx];
  const auto grid = sampler.grid();
  const std::size_t n = grid.size();
  constexpr double kStep = 1e-4;

  struct Pair {
    double derivative;
    double overlap;
  };
  const auto per = parallel_map(replicas, workers, [&](std::size_t r) {
    std::vector<double> low(n);
    std::vector<double> high(n);
    sampler.sample(r, low, high);
    double c = 0.0;
    double s = 0.0;
    kernels::scalar::unit_phasors(sampler.seed(), stream_id(StreamDomain::FieldPhases, r), idx, std::span(&c, 1),
                                  std::span(&s, 1));
    std::vector<double> v(n);
    std::vector<double> plus(n);
    std::vector<double> minus(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = low[i] + high[i];
      const double g = amp * (c * std::cos(grid[i] * omega) + s * std::sin(grid[i] * omega));
      plus[i] = v[i] + kStep * g;
      minus[i] = v[i] - kStep * g;
    }
    const double deriv = (log_partition(plus, beta) - log_partition(minus, beta)) / (2.0 * kStep);
    const GibbsWeights gw = gibbs_weights(v, beta);
    std::complex<double> a{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) a += gw.weights[i] * std::polar(1.0, grid[i] * omega);
    const double overlap = 0.5 * beta * beta * (1.0 - std::norm(a)) / static_cast<double>(p);
    return Pair{deriv, overlap};
  });

  std::vector<double> d(replicas);
  std::vector<double> o(replicas);
  std::vector<double> diff(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    d[r] = per[r].derivative;
    o[r] = per[r].overlap;
    diff[r] = d[r] - o[r];
  }
  SinglePrimeCheck out;
  out.prime = p;
  out.beta = beta;
  out.derivative = mean_and_se(d).mean;
  out.overlap_side = mean_and_se(o).mean;
  const MeanEstimate de = mean_and_se(diff);
  out.difference = de.mean;
  out.combined_se = de.std_error;
  out.allowance = kSinglePrimeC * std::pow(static_cast<double>(p), -1.5);
  out.replicas = replicas;
  out.pass = std::abs(out.difference) <= 3.0 * out.combined_se + out.allowance;
  return out;
}

SinglePrimeCheck single_prime_derivative_check(std::uint64_t p, double beta, const FieldConfig& config,
                                               const PrimeTable& table, std::size_t replicas, unsigned workers) {
  if (p > scale_cutoff(config.log_T, 1.0)) throw_invalid("prime exceeds the field's cutoff exp(log T)");
  const FieldSampler sampler = FieldSampler::for_config(config, table);
  return single_prime_derivative_check(p, beta, sampler, replicas, workers);
}

TailReport tail_bound_check(const ScaleRange& range, double gamma, const FieldConfig& config, const PrimeTable& table,
                            std::size_t replicas, unsigned workers, double pair_distance) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw_invalid("gamma must lie in (0,1]");
  if (replicas < 2) throw_invalid("need at least 2 replicas");
  const FieldSampler sampler = increment_sampler(range, config, table);
  const std::size_t n = sampler.grid_size();
  const double thr = gamma * log_log(range.log_T);
  const auto lag = static_cast<std::size_t>(std::llround(pair_distance * static_cast<double>(n)));
  if (lag == 0 || lag >= n) throw_invalid("pair distance must map to a lag in [1, N)");

  struct Counts {
    double point;
    double joint;
  };
  const auto per = parallel_map(replicas, workers, [&](std::size_t r) {
    std::vector<double> low(n);
    std::vector<double> x(n);
    sampler.sample(r, low, x);
    std::size_t above = 0;
    std::size_t both = 0;
    for (std::size_t i = 0; i < n; ++i) above += x[i] > thr;
    for (std::size_t i = 0; i + lag < n; ++i) both += (x[i] > thr) && (x[i + lag] > thr);
    return Counts{static_cast<double>(above) / static_cast<double>(n),
                  static_cast<double>(both) / static_cast<double>(n - lag)};
  });
  std::vector<double> pt(replicas);
  std::vector<double> jt(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    pt[r] = per[r].point;
    jt[r] = per[r].joint;
  }
  const MeanEstimate pe = mean_and_se(pt);
  const MeanEstimate je = mean_and_se(jt);

  TailReport out;
  out.gamma = gamma;
  out.threshold = thr;
  out.empirical_prob = pe.mean;
  out.empirical_se = pe.std_error;
  out.samples = replicas * n;
  out.bound = kTailConstant * std::pow(range.log_T, -gamma * gamma / (range.alpha_hi - range.alpha_lo));
  out.inconclusive = pe.mean * static_cast<double>(out.samples) < 10.0;
  out.within_bound = out.empirical_prob <= out.bound;
  out.pair_distance = static_cast<double>(lag) / static_cast<double>(n);
  out.pair_regime = out.pair_distance > std::pow(range.log_T, -range.alpha_lo);
  out.joint_prob = je.mean;
  out.joint_se = je.std_error;
  out.pair_inconclusive = je.mean * static_cast<double>(replicas * (n - lag)) < 10.0 || pe.mean <= 0.0;
  if (pe.mean > 0.0) {
    out.factorization_ratio = je.mean / (pe.mean * pe.mean);
    // Delta method on joint / p^2 with the two SEs treated as independent.
    const double rel = std::hypot(je.mean > 0.0 ? je.std_error / je.mean : 0.0, 2.0 * pe.std_error / pe.mean);
    out.ratio_se = out.factorization_ratio * rel;
  }
  return out;
}

SmoothingReport smoothing_check(const ScaleRange& range, double gamma, const FieldConfig& config,
                                const PrimeTable& table, std::size_t replicas, unsigned workers) {
  if (!(gamma > 0.0)) throw_invalid("gamma must be > 0");
  if (replicas < 2) throw_invalid("need at least 2 replicas");
  const FieldSampler sampler = increment_sampler(range, config, table);
  const std::size_t n = sampler.grid_size();
  const double width = std::pow(range.log_T, -range.alpha_hi);
  const std::size_t per_block =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(width * static_cast<double>(n))));
  const std::size_t blocks = n / per_block;
  const double thr = gamma * log_log(range.log_T);

  struct Counts {
    double point;
    double block;
  };
  const auto per = parallel_map(replicas, workers, [&](std::size_t r) {
    std::vector<double> low(n);
    std::vector<double> x(n);
    sampler.sample(r, low, x);
    std::size_t above = 0;
    std::size_t block_above = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
      double mx = x[b * per_block];
      for (std::size_t k = 0; k < per_block; ++k) {
        mx = std::max(mx, x[b * per_block + k]);
        above += x[b * per_block + k] > thr;
      }
      block_above += mx > thr;
    }
    return Counts{static_cast<double>(above) / static_cast<double>(blocks * per_block),
                  static_cast<double>(block_above) / static_cast<double>(blocks)};
  });
  CompensatedSum ps;
  CompensatedSum bs;
  for (const Counts& c : per) {
    ps.add(c.point);
    bs.add(c.block);
  }
  SmoothingReport out;
  out.block_width = width;
  out.points_per_block = per_block;
  out.point_prob = ps.value() / static_cast<double>(replicas);
  out.block_prob = bs.value() / static_cast<double>(replicas);
  out.inconclusive = out.point_prob * static_cast<double>(replicas * n) < 10.0;
  out.ratio = out.point_prob > 0.0 ? out.block_prob / out.point_prob : 0.0;
  return out;
}

MaxCheck max_field_from_samples(std::span<const FieldSample> samples, double u, double epsilon) {
  if (!(epsilon > 0.0)) throw_invalid("epsilon must be > 0");
  if (samples.size() < 2) throw_invalid("need at least 2 replicas");
  const FieldConfig& cfg = samples.front().config;
  const double thr = (1.0 + epsilon) * theory::gamma_star(cfg.alpha, u) * log_log(cfg.log_T);
  std::vector<double> hit(samples.size());
  std::vector<double> v;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    v.resize(samples[r].low.size());
    perturb_into(samples[r].low, samples[r].high, u, v);
    hit[r] = *std::max_element(v.begin(), v.end()) > thr ? 1.0 : 0.0;
  }
  const MeanEstimate e = mean_and_se(hit);
  return {e.mean, e.std_error, thr, samples.size()};
}

MaxCheck max_field_check(const FieldConfig& config, const PrimeTable& table, double u, double epsilon,
                         std::size_t replicas, unsigned workers) {
  const auto samples = sample_ensemble(config, table, replicas, workers);
  return max_field_from_samples(samples, u, epsilon);
}

MeasureEstimate high_points_from_samples(std::span<const FieldSample> samples, double u, double gamma) {
  if (samples.empty()) throw_invalid("need at least 1 replica");
  const FieldConfig& cfg = samples.front().config;
  const double gs = theory::gamma_star(cfg.alpha, u);
  if (!(gamma > 0.0 && gamma < gs)) throw_invalid("gamma must lie in (0, gamma_star)");
  const double ll = log_log(cfg.log_T);
  const double thr = gamma * ll;
  std::vector<double> frac(samples.size());
  std::vector<double> v;
  bool any = false;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    v.resize(samples[r].low.size());
    perturb_into(samples[r].low, samples[r].high, u, v);
    std::size_t above = 0;
    for (double x : v) above += x > thr;
    frac[r] = static_cast<double>(above) / static_cast<double>(v.size());
    any = any || above > 0;
  }
  MeasureEstimate out;
  out.gamma = gamma;
  out.u = u;
  out.alpha = cfg.alpha;
  out.log_T = cfg.log_T;
  out.replicas = samples.size();
  out.median_measure = median(frac);
  out.inconclusive = !any || out.median_measure <= 0.0;
  out.normalized_log_measure = out.inconclusive ? -INFINITY : std::log(out.median_measure) / ll;
  return out;
}

MeasureEstimate high_points_measure_estimate(const FieldConfig& config, const PrimeTable& table, double u,
                                             double gamma, std::size_t replicas, unsigned workers) {
  const auto samples = sample_ensemble(config, table, replicas, workers);
  return high_points_from_samples(samples, u, gamma);
}

}  // namespace rsb::oracle
