#include "rsb/field.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "rsb/error.hpp"
#include "rsb/philox.hpp"

namespace rsb {

namespace {

constexpr std::size_t kPhasorChunk = 2048;
constexpr const char* kDumpVersionLine = "# rsbzeta replica-dump v1";
constexpr const char* kDumpHeader = "replica_id,grid_index,h,low,high";

std::string fmt17(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void FieldConfig::validate() const {
  if (!(log_T > std::numbers::e)) throw_invalid("log_T must exceed e, got " + std::to_string(log_T));
  if (!(alpha > 0.0 && alpha < 1.0)) throw_invalid("alpha must lie in (0,1), got " + std::to_string(alpha));
  if (oversample < 1) throw_invalid("oversample must be >= 1");
  const std::size_t need = min_grid_size(log_T, oversample);
  if (grid_size < need)
    throw_invalid("grid_size " + std::to_string(grid_size) + " is below ceil(oversample * log_T) = " +
                  std::to_string(need));
}

std::size_t FieldConfig::min_grid_size(double log_T, int oversample) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(oversample) * log_T - 1e-9));
}

FieldConfig FieldConfig::with_min_grid(double log_T, double alpha, int oversample, std::uint64_t seed) {
  FieldConfig c;
  c.log_T = log_T;
  c.alpha = alpha;
  c.oversample = oversample;
  c.seed = seed;
  c.grid_size = min_grid_size(log_T, oversample);
  c.validate();
  return c;
}

std::vector<double> midpoint_grid(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return g;
}

std::vector<double> FieldSample::full() const {
  std::vector<double> out(low.size());
  for (std::size_t i = 0; i < low.size(); ++i) out[i] = low[i] + high[i];
  return out;
}

FieldSampler::FieldSampler(const PrimeTable& table, IndexRange low, IndexRange high, std::vector<double> grid,
                           std::uint64_t seed, FieldPath path)
    : table_(&table), grid_(std::move(grid)), seed_(seed), path_(path) {
  if (grid_.empty()) throw_invalid("field grid must be non-empty");
  for (double h : grid_)
    if (!(h >= 0.0 && h <= 1.0)) throw_invalid("grid points must lie in [0,1]");
  if (low.end > table.size() || high.end > table.size()) throw_coverage("index range beyond prime table");
  if (!low.empty() && !high.empty() && low.end > high.begin) throw_invalid("low and high windows overlap");
  low_ = make_part(low);
  high_ = make_part(high);
}

FieldSampler FieldSampler::for_config(const FieldConfig& config, const PrimeTable& table, FieldPath path) {
  config.validate();
  const std::uint64_t cut_alpha = scale_cutoff(config.log_T, config.alpha);
  const std::uint64_t cut_full = scale_cutoff(config.log_T, 1.0);
  const IndexRange low = table.indices(PrimeWindow{1, cut_alpha});
  const IndexRange high = table.indices(PrimeWindow{cut_alpha, cut_full});
  return FieldSampler(table, low, high, midpoint_grid(config.grid_size), config.seed, path);
}

FieldSampler::Part FieldSampler::make_part(IndexRange range) const {
  Part part;
  part.range = range;
  const auto omega = table_->log_p().subspan(range.begin, range.size());
  part.plan = SpectrumPlan::build(omega);
  part.basis = SpectrumBasis(part.plan, grid_);
  return part;
}

void FieldSampler::sample(std::uint64_t replica, std::span<double> low, std::span<double> high) const {
  if (low.size() != grid_.size() || high.size() != grid_.size()) throw_invalid("sample output size mismatch");
  if (path_ == FieldPath::Direct) {
    sample_part_direct(low_, replica, low);
    sample_part_direct(high_, replica, high);
  } else {
    sample_part(low_, replica, low);
    sample_part(high_, replica, high);
  }
}

void FieldSampler::sample_part(const Part& part, std::uint64_t replica, std::span<double> out) const {
  if (part.range.empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const kernels::Isa isa = kernels::active_isa();
  const std::uint64_t stream = stream_id(StreamDomain::FieldPhases, replica);
  const auto omega = table_->log_p();
  const auto weight = table_->inv_sqrt_p();

  SpectrumMoments moments;
  moments.reset(part.plan.bins());
  std::vector<double> c(kPhasorChunk);
  std::vector<double> s(kPhasorChunk);

  std::size_t bin = 0;
  for (std::size_t lo = part.range.begin; lo < part.range.end; lo += kPhasorChunk) {
    const std::size_t n = std::min(kPhasorChunk, part.range.end - lo);
    kernels::unit_phasors(isa, seed_, stream, lo, std::span(c).first(n), std::span(s).first(n));
    // Walk the bins overlapping [lo, lo + n); offsets in the plan are relative to range.begin.
    std::size_t pos = lo;
    while (pos < lo + n) {
      const std::size_t bin_end = part.range.begin + part.plan.bin_start[bin + 1];
      const std::size_t stop = std::min(bin_end, lo + n);
      const std::size_t len = stop - pos;
      kernels::accumulate_moments(isa, omega.subspan(pos, len), weight.subspan(pos, len),
                                  std::span<const double>(c).subspan(pos - lo, len),
                                  std::span<const double>(s).subspan(pos - lo, len), part.plan.centers[bin],
                                  moments.re[bin], moments.im[bin]);
      pos = stop;
      if (pos == bin_end) ++bin;
    }
  }
  part.basis.evaluate(moments, out);
}

void FieldSampler::sample_part_direct(const Part& part, std::uint64_t replica, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (part.range.empty()) return;
  const std::uint64_t stream = stream_id(StreamDomain::FieldPhases, replica);
  const auto omega = table_->log_p();
  const auto weight = table_->inv_sqrt_p();
  std::vector<double> c(part.range.size());
  std::vector<double> s(part.range.size());
  kernels::scalar::unit_phasors(seed_, stream, part.range.begin, c, s);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double h = grid_[i];
    double acc = 0.0;
    for (std::size_t k = 0; k < part.range.size(); ++k) {
      const double arg = h * omega[part.range.begin + k];
      acc += weight[part.range.begin + k] * (c[k] * std::cos(arg) + s[k] * std::sin(arg));
    }
    out[i] = acc;
  }
}

FieldSample sample_field(const FieldConfig& config, const PrimeTable& table, std::uint64_t replica_id) {
  const FieldSampler sampler = FieldSampler::for_config(config, table);
  FieldSample out;
  out.config = config;
  out.replica_id = replica_id;
  out.low.resize(config.grid_size);
  out.high.resize(config.grid_size);
  sampler.sample(replica_id, out.low, out.high);
  return out;
}

void perturb_into(std::span<const double> low, std::span<const double> high, double u, std::span<double> out) {
  if (!(std::abs(u) < 1.0)) throw_invalid("perturbation u must satisfy |u| < 1, got " + std::to_string(u));
  if (low.size() != high.size() || out.size() != low.size()) throw_invalid("perturb: size mismatch");
  const double scale = 1.0 + u;
  for (std::size_t i = 0; i < low.size(); ++i) out[i] = scale * low[i] + high[i];
}

PerturbedField perturb(const FieldSample& sample, double u) {
  PerturbedField out;
  out.u = u;
  out.values.resize(sample.low.size());
  perturb_into(sample.low, sample.high, u, out.values);
  return out;
}

double covariance_exact(double h, double h_prime, const PrimeTable& table, const PrimeWindow& window) {
  if (!(h >= 0.0 && h <= 1.0 && h_prime >= 0.0 && h_prime <= 1.0)) throw_invalid("h, h' must lie in [0,1]");
  return 0.5 * cosine_prime_sum(table, window, std::abs(h - h_prime));
}

double covariance_exact(double h, double h_prime, const PrimeTable& table, const ScaleRange& range) {
  return covariance_exact(h, h_prime, table, range.window());
}

double overlap_rho(double h, double h_prime, const PrimeTable& table, double log_T) {
  const PrimeWindow full{1, scale_cutoff(log_T, 1.0)};
  const double var = covariance_exact(h, h, table, full);
  if (var == 0.0) throw_invalid("overlap undefined on an empty prime window");
  return covariance_exact(h, h_prime, table, full) / var;
}

OverlapTable::OverlapTable(const PrimeTable& table, const PrimeWindow& window, std::size_t grid_size) {
  if (grid_size == 0) throw_invalid("overlap table needs a non-empty grid");
  const IndexRange r = table.indices(window);
  if (r.empty()) throw_invalid("overlap undefined on an empty prime window");
  const auto omega = table.log_p().subspan(r.begin, r.size());
  std::vector<double> inv_p(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) inv_p[i] = 1.0 / static_cast<double>(table.primes()[r.begin + i]);
  const SpectrumPlan plan = SpectrumPlan::build(omega);
  const SpectrumMoments m = real_amplitude_moments(plan, omega, inv_p);
  std::vector<double> lags(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) lags[k] = static_cast<double>(k) / static_cast<double>(grid_size);
  const SpectrumBasis basis(plan, lags);
  std::vector<double> cos_sums(grid_size);
  basis.evaluate(m, cos_sums);
  // Lag 0 uses the exact compensated reciprocal sum so rho(h,h) == 1 exactly.
  const double recip = prime_reciprocal_sum(table, window);
  variance_ = 0.5 * recip;
  rho_.resize(grid_size);
  rho_[0] = 1.0;
  for (std::size_t k = 1; k < grid_size; ++k) rho_[k] = cos_sums[k] / recip;
}

OverlapTable OverlapTable::for_log_T(const PrimeTable& table, double log_T, std::size_t grid_size) {
  return OverlapTable(table, PrimeWindow{1, scale_cutoff(log_T, 1.0)}, grid_size);
}

void write_replica_dump(std::ostream& os, std::span<const FieldSample> samples) {
  os << kDumpVersionLine << '\n' << kDumpHeader << '\n';
  for (const FieldSample& s : samples) {
    const std::vector<double> grid = midpoint_grid(s.low.size());
    for (std::size_t i = 0; i < s.low.size(); ++i) {
      os << s.replica_id << ',' << i << ',' << fmt17(grid[i]) << ',' << fmt17(s.low[i]) << ',' << fmt17(s.high[i])
         << '\n';
    }
  }
}

std::vector<FieldSample> read_replica_dump(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kDumpVersionLine) throw_invalid("replica dump: missing version line");
  if (!std::getline(is, line) || line != kDumpHeader) throw_invalid("replica dump: unexpected header");
  std::vector<FieldSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::uint64_t replica = 0;
    std::size_t index = 0;
    double cols[3];
    std::size_t start = 0;
    for (int c = 0; c < 5; ++c) {
      const std::size_t end = c < 4 ? line.find(',', start) : line.size();
      if (end == std::string::npos) throw_invalid("replica dump: short row");
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      std::from_chars_result res{};
      if (c == 0) {
        res = std::from_chars(first, last, replica);
      } else if (c == 1) {
        res = std::from_chars(first, last, index);
      } else {
        res = std::from_chars(first, last, cols[c - 2]);
      }
      if (res.ec != std::errc{} || res.ptr != last) throw_invalid("replica dump: bad field in row: " + line);
      start = end + 1;
    }
    if (out.empty() || out.back().replica_id != replica) {
      out.emplace_back();
      out.back().replica_id = replica;
    }
    FieldSample& s = out.back();
    if (index != s.low.size()) throw_invalid("replica dump: grid indices out of order");
    s.low.push_back(cols[1]);
    s.high.push_back(cols[2]);
  }
  for (FieldSample& s : out) s.config.grid_size = s.low.size();
  return out;
}

}  // namespace rsb
