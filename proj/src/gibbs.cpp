#include "rsb/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsb/error.hpp"
#include "rsb/numeric.hpp"
#include "rsb/parallel.hpp"
#include "rsb/philox.hpp"

namespace rsb {

namespace {

void check_values(std::span<const double> values, double beta) {
  if (values.empty()) throw_invalid("Gibbs weights need at least one value");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw_invalid("beta must be finite and > 0, got " + std::to_string(beta));
  for (double v : values)
    if (!std::isfinite(v)) throw_invalid("Gibbs weights need finite values");
}

double max_scaled(std::span<const double> values, double beta) {
  double m = beta * values[0];
  for (double v : values) m = std::max(m, beta * v);
  return m;
}

}  // namespace

GibbsWeights gibbs_weights(std::span<const double> values, double beta) {
  check_values(values, beta);
  GibbsWeights g;
  g.beta = beta;
  g.weights.resize(values.size());
  const double m = max_scaled(values, beta);
  CompensatedSum total;
  for (std::size_t i = 0; i < values.size(); ++i) {
    g.weights[i] = std::exp(beta * values[i] - m);
    total.add(g.weights[i]);
  }
  const double z = total.value();
  for (double& w : g.weights) w /= z;
  g.log_Z = m + std::log(z / static_cast<double>(values.size()));
  return g;
}

double log_partition(std::span<const double> values, double beta) {
  check_values(values, beta);
  const double m = max_scaled(values, beta);
  CompensatedSum total;
  for (double v : values) total.add(std::exp(beta * v - m));
  return m + std::log(total.value() / static_cast<double>(values.size()));
}

std::vector<FieldSample> sample_ensemble(const FieldConfig& config, const PrimeTable& table, std::size_t count,
                                         unsigned workers, std::uint64_t first) {
  const FieldSampler sampler = FieldSampler::for_config(config, table);
  return parallel_map(count, workers, [&](std::size_t r) {
    FieldSample s;
    s.config = config;
    s.replica_id = first + r;
    s.low.resize(config.grid_size);
    s.high.resize(config.grid_size);
    sampler.sample(s.replica_id, s.low, s.high);
    return s;
  });
}

double FreeEnergyEstimate::normalized() const { return mean / log_log(log_T); }
double FreeEnergyEstimate::normalized_std_error() const { return std_error / log_log(log_T); }

FreeEnergyEstimate free_energy_from_samples(std::span<const FieldSample> samples, double beta, double u) {
  if (samples.size() < 2) throw_invalid("free energy estimate needs at least 2 replicas");
  std::vector<double> log_z(samples.size());
  std::vector<double> values;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    values.resize(samples[r].low.size());
    perturb_into(samples[r].low, samples[r].high, u, values);
    log_z[r] = log_partition(values, beta);
  }
  const MeanEstimate est = mean_and_se(log_z);
  FreeEnergyEstimate out;
  out.mean = est.mean;
  out.std_error = est.std_error;
  out.replicas = samples.size();
  out.beta = beta;
  out.alpha = samples.front().config.alpha;
  out.u = u;
  out.log_T = samples.front().config.log_T;
  return out;
}

FreeEnergyEstimate free_energy_estimate(const FieldConfig& config, const PrimeTable& table, double beta, double u,
                                        std::size_t replicas, unsigned workers) {
  if (!(std::abs(u) < 1.0)) throw_invalid("perturbation u must satisfy |u| < 1");
  if (replicas < 2) throw_invalid("free energy estimate needs at least 2 replicas");
  const auto samples = sample_ensemble(config, table, replicas, workers);
  return free_energy_from_samples(samples, beta, u);
}

DerivativeEstimate du_free_energy_from_samples(std::span<const FieldSample> samples, double beta, double step) {
  if (!(step > 0.0 && step <= 0.1)) throw_invalid("finite-difference step must lie in (0, 0.1]");
  if (samples.size() < 2) throw_invalid("derivative estimate needs at least 2 replicas");
  std::vector<double> diffs(samples.size());
  std::vector<double> plus;
  std::vector<double> minus;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    plus.resize(s.low.size());
    minus.resize(s.low.size());
    perturb_into(s.low, s.high, step, plus);
    perturb_into(s.low, s.high, -step, minus);
    diffs[r] = (log_partition(plus, beta) - log_partition(minus, beta)) / (2.0 * step);
  }
  const MeanEstimate est = mean_and_se(diffs);
  return {est.mean, est.std_error, samples.size(), step};
}

DerivativeEstimate du_free_energy(const FieldConfig& config, const PrimeTable& table, double beta, double step,
                                  std::size_t replicas, unsigned workers) {
  if (!(step > 0.0 && step <= 0.1)) throw_invalid("finite-difference step must lie in (0, 0.1]");
  const auto samples = sample_ensemble(config, table, replicas, workers);
  return du_free_energy_from_samples(samples, beta, step);
}

OverlapHistogram make_overlap_histogram(std::size_t bins) {
  if (bins < 2) throw_invalid("overlap histogram needs at least 2 bins");
  OverlapHistogram h;
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.bin_edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins);
  h.bin_edges.front() = -1.0;
  h.bin_edges.back() = 1.0;
  if (bins % 2 == 0) h.bin_edges[bins / 2] = 0.0;
  h.masses.assign(bins, 0.0);
  return h;
}

std::size_t OverlapHistogram::bin_of(double rho) const {
  const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), rho);
  if (it == bin_edges.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
  return std::min(idx, masses.size() - 1);
}

double OverlapHistogram::mass_within(double lo, double hi) const {
  double m = 0.0;
  for (std::size_t b = 0; b < masses.size(); ++b)
    if (bin_edges[b] >= lo && bin_edges[b + 1] <= hi) m += masses[b];
  return m;
}

OverlapHistogram sample_overlap_pairs(const GibbsWeights& weights, const OverlapTable& overlaps, std::size_t n_pairs,
                                      std::uint64_t seed, std::uint64_t replica, std::size_t bins) {
  if (n_pairs < 1) throw_invalid("n_pairs must be >= 1");
  if (weights.weights.size() != overlaps.grid_size()) throw_invalid("weights and overlap table differ in grid size");
  OverlapHistogram h = make_overlap_histogram(bins);
  h.beta = weights.beta;
  std::vector<double> cdf(weights.weights.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc.add(weights.weights[i]);
    cdf[i] = acc.value();
  }
  const double total = cdf.back();
  PhiloxStream rng(seed, stream_id(StreamDomain::PairSampling, replica));
  auto draw = [&] {
    const double x = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  };
  std::vector<double> counts(bins, 0.0);
  h.samples.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t i = draw();
    const std::size_t j = draw();
    const double rho = overlaps.rho(i, j);
    counts[h.bin_of(rho)] += 1.0;
    h.samples.push_back(rho);
  }
  for (std::size_t b = 0; b < bins; ++b) h.masses[b] = counts[b] / static_cast<double>(n_pairs);
  h.pair_count = n_pairs;
  return h;
}

OverlapHistogram enumerate_overlap_law(const GibbsWeights& weights, const OverlapTable& overlaps, std::size_t bins) {
  if (weights.weights.size() != overlaps.grid_size()) throw_invalid("weights and overlap table differ in grid size");
  OverlapHistogram h = make_overlap_histogram(bins);
  h.beta = weights.beta;
  const std::size_t n = weights.weights.size();
  // Bin each lag once: mass(lag) = sum_{|i-j| = lag} w_i w_j.
  std::vector<CompensatedSum> per_bin(bins);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double m = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) m += weights.weights[i] * weights.weights[i + lag];
    if (lag > 0) m *= 2.0;
    per_bin[h.bin_of(overlaps.rho_at_lag(lag))].add(m);
  }
  for (std::size_t b = 0; b < bins; ++b) h.masses[b] = per_bin[b].value();
  h.pair_count = static_cast<std::uint64_t>(n) * n;
  return h;
}

OverlapHistogram merge_overlap_histograms(std::span<const OverlapHistogram> parts) {
  if (parts.empty()) throw_invalid("nothing to merge");
  OverlapHistogram out = make_overlap_histogram(parts.front().bins());
  out.beta = parts.front().beta;
  out.u = parts.front().u;
  out.log_T = parts.front().log_T;
  std::vector<CompensatedSum> acc(out.bins());
  for (const OverlapHistogram& p : parts) {
    if (p.bins() != out.bins()) throw_invalid("cannot merge histograms with different binning");
    for (std::size_t b = 0; b < p.bins(); ++b) acc[b].add(p.masses[b]);
    out.pair_count += p.pair_count;
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  }
  for (std::size_t b = 0; b < out.bins(); ++b) out.masses[b] = acc[b].value() / static_cast<double>(parts.size());
  return out;
}

FubiniCheck overlap_cdf_integral(const OverlapHistogram& histogram, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw_invalid("alpha must lie in (0,1)");
  const auto& e = histogram.bin_edges;
  const auto& m = histogram.masses;
  FubiniCheck out;

  // CDF is piecewise linear (mass spread uniformly inside each bin); the
  // trapezoid rule on the breakpoints in [0, alpha] is exact.
  auto cdf = [&](double s) {
    double c = 0.0;
    for (std::size_t b = 0; b < m.size(); ++b) {
      if (e[b + 1] <= s) {
        c += m[b];
      } else if (e[b] < s) {
        c += m[b] * (s - e[b]) / (e[b + 1] - e[b]);
      }
    }
    return c;
  };
  std::vector<double> knots{0.0};
  for (double x : e)
    if (x > 0.0 && x < alpha) knots.push_back(x);
  knots.push_back(alpha);
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k)
    integral += 0.5 * (cdf(knots[k]) + cdf(knots[k + 1])) * (knots[k + 1] - knots[k]);
  out.via_cdf = integral;

  auto kernel = [alpha](double rho) { return rho <= alpha ? alpha - std::max(rho, 0.0) : 0.0; };
  if (!histogram.samples.empty()) {
    CompensatedSum s;
    for (double rho : histogram.samples) s.add(kernel(rho));
    out.via_identity = s.value() / static_cast<double>(histogram.samples.size());
  } else {
    CompensatedSum s;
    for (std::size_t b = 0; b < m.size(); ++b) s.add(m[b] * kernel(0.5 * (e[b] + e[b + 1])));
    out.via_identity = s.value();
  }
  double width = 0.0;
  for (std::size_t b = 0; b < m.size(); ++b) width = std::max(width, e[b + 1] - e[b]);
  out.tolerance = width;
  out.agree = std::abs(out.via_cdf - out.via_identity) <= out.tolerance;
  return out;
}

}  // namespace rsb
