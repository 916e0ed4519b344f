#include "rsb/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "rsb/error.hpp"
#include "rsb/field.hpp"
#include "rsb/gibbs.hpp"
#include "rsb/kernels.hpp"
#include "rsb/numeric.hpp"
#include "rsb/parallel.hpp"
#include "rsb/primes.hpp"
#include "rsb/report.hpp"
#include "rsb/theory.hpp"
#include "rsb/validate.hpp"

namespace rsb {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Cell = CsvWriter::Cell;

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::ostream* progress;
  std::vector<std::string>& outputs;

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (dir / name).string();
  }
  void log(const std::string& msg) const {
    if (progress) *progress << msg << '\n' << std::flush;
  }
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

PrimeTable table_for_ladder(const std::vector<double>& ladder, std::uint64_t floor_limit = 0) {
  std::uint64_t limit = floor_limit;
  for (double L : ladder) limit = std::max(limit, scale_cutoff(L, 1.0));
  return sieve_primes(std::max<std::uint64_t>(limit, 2));
}

/// Limiting two-overlap law at u = 0: all mass at 0 for beta <= 2,
/// Bernoulli with P(0) = 2/beta above.
std::pair<double, double> overlap_atoms(double beta) {
  if (beta <= 2.0) return {1.0, 0.0};
  return {2.0 / beta, 1.0 - 2.0 / beta};
}

std::vector<double> default_gammas(const ExperimentConfig& cfg) {
  return cfg.gamma.empty() ? std::vector<double>{0.3, 0.5, 0.7} : cfg.gamma;
}

void run_theory(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  CsvWriter out(ctx.path("theory.csv"),
                {"beta", "alpha", "u", "variance_factor", "limiting_free_energy", "variational_free_energy",
                 "variational_maximizer", "gamma_star", "gamma_c", "du_left", "du_right", "overlap_p0", "overlap_p1",
                 "rem_free_energy"});
  for (double u : cfg.u) {
    for (double beta : cfg.beta) {
      const theory::TheoryPoint p{beta, cfg.alpha, u, std::nullopt};
      const theory::VariationalResult var = theory::variational_free_energy(p, 4000);
      Cell gc = std::string();
      if (u >= 0.0) gc = theory::gamma_c(cfg.alpha, u);
      Cell p0 = std::string();
      Cell p1 = std::string();
      if (u == 0.0) {
        const auto [a0, a1] = overlap_atoms(beta);
        p0 = a0;
        p1 = a1;
      }
      out.row({beta, cfg.alpha, u, p.variance_factor(), theory::limiting_free_energy(p), var.value, var.maximizer,
               theory::gamma_star(cfg.alpha, u), gc, theory::du_limiting_free_energy(p, theory::Side::Left),
               theory::du_limiting_free_energy(p, theory::Side::Right), p0, p1, theory::rem_free_energy(beta)});
    }
  }
  CsvWriter hp(ctx.path("theory_high_points.csv"), {"alpha", "u", "gamma", "high_points_exponent", "lambda_star"});
  for (double u : cfg.u) {
    const double gs = theory::gamma_star(cfg.alpha, u);
    std::vector<double> gammas = cfg.gamma;
    if (gammas.empty())
      for (int k = 1; k < 20; ++k) gammas.push_back(gs * k / 20.0);
    for (double g : gammas) {
      if (!(g < gs)) continue;
      const theory::TheoryPoint p{1.0, cfg.alpha, u, g};
      hp.row({cfg.alpha, u, g, theory::high_points_exponent(g, p), theory::lambda_star(g, cfg.alpha, u)});
    }
  }
}

/// Per replica: sample once, then evaluate fn(low, high) -> vector of
/// per-point values. Results are indexed [replica][point].
template <class Fn>
std::vector<std::vector<double>> per_replica(const FieldSampler& sampler, std::size_t replicas, unsigned workers,
                                             Fn fn) {
  return parallel_map(replicas, workers, [&](std::size_t r) {
    std::vector<double> low(sampler.grid_size());
    std::vector<double> high(sampler.grid_size());
    sampler.sample(r, low, high);
    return fn(r, low, high);
  });
}

void run_free_energy(Context& ctx, const PrimeTable& table) {
  const ExperimentConfig& cfg = ctx.cfg;
  CsvWriter out(ctx.path("free_energy.csv"),
                {"beta", "alpha", "u", "log_T", "loglog_T", "grid_size", "replicas", "mean_log_Z", "se_log_Z",
                 "normalized", "normalized_se", "theory_limit"});
  for (double L : cfg.log_T) {
    const FieldConfig fc = FieldConfig::with_min_grid(L, cfg.alpha, cfg.grid_oversample, cfg.seed);
    const FieldSampler sampler = FieldSampler::for_config(fc, table);
    ctx.log("free-energy: log_T=" + format_double(L) + " N=" + std::to_string(fc.grid_size));
    const auto vals = per_replica(sampler, cfg.replicas, cfg.workers,
                                  [&](std::size_t, std::span<const double> low, std::span<const double> high) {
                                    std::vector<double> res;
                                    std::vector<double> v(low.size());
                                    for (double u : cfg.u) {
                                      perturb_into(low, high, u, v);
                                      for (double beta : cfg.beta) res.push_back(log_partition(v, beta));
                                    }
                                    return res;
                                  });
    const double ll = log_log(L);
    std::size_t k = 0;
    std::vector<double> col(cfg.replicas);
    for (double u : cfg.u) {
      for (double beta : cfg.beta) {
        for (std::size_t r = 0; r < cfg.replicas; ++r) col[r] = vals[r][k];
        ++k;
        const MeanEstimate e = mean_and_se(col);
        const double lim = theory::limiting_free_energy({beta, cfg.alpha, u, std::nullopt});
        out.row({beta, cfg.alpha, u, L, ll, static_cast<std::uint64_t>(fc.grid_size),
                 static_cast<std::uint64_t>(cfg.replicas), e.mean, e.std_error, e.mean / ll, e.std_error / ll, lim});
      }
    }
  }
}

void run_overlap(Context& ctx, const PrimeTable& table) {
  const ExperimentConfig& cfg = ctx.cfg;
  CsvWriter out(ctx.path("overlap.csv"), {"beta", "alpha", "u", "log_T", "replicas", "pairs_per_replica", "bin_lo",
                                          "bin_hi", "mass", "theory_p0", "theory_p1"});
  const OverlapHistogram edges = make_overlap_histogram();
  for (double L : cfg.log_T) {
    const FieldConfig fc = FieldConfig::with_min_grid(L, cfg.alpha, cfg.grid_oversample, cfg.seed);
    const FieldSampler sampler = FieldSampler::for_config(fc, table);
    const OverlapTable ot = OverlapTable::for_log_T(table, L, fc.grid_size);
    ctx.log("overlap: log_T=" + format_double(L) + " N=" + std::to_string(fc.grid_size));
    const auto vals = per_replica(sampler, cfg.replicas, cfg.workers,
                                  [&](std::size_t r, std::span<const double> low, std::span<const double> high) {
                                    std::vector<double> res;
                                    std::vector<double> v(low.size());
                                    for (double u : cfg.u) {
                                      perturb_into(low, high, u, v);
                                      for (double beta : cfg.beta) {
                                        const OverlapHistogram h = sample_overlap_pairs(
                                            gibbs_weights(v, beta), ot, cfg.pairs_per_replica, cfg.seed, r);
                                        res.insert(res.end(), h.masses.begin(), h.masses.end());
                                      }
                                    }
                                    return res;
                                  });
    const std::size_t bins = edges.bins();
    std::size_t point = 0;
    for (double u : cfg.u) {
      for (double beta : cfg.beta) {
        for (std::size_t b = 0; b < bins; ++b) {
          CompensatedSum s;
          for (std::size_t r = 0; r < cfg.replicas; ++r) s.add(vals[r][point * bins + b]);
          Cell p0 = std::string();
          Cell p1 = std::string();
          if (u == 0.0) {
            const auto [a0, a1] = overlap_atoms(beta);
            p0 = a0;
            p1 = a1;
          }
          out.row({beta, cfg.alpha, u, L, static_cast<std::uint64_t>(cfg.replicas),
                   static_cast<std::uint64_t>(cfg.pairs_per_replica), edges.bin_edges[b], edges.bin_edges[b + 1],
                   s.value() / static_cast<double>(cfg.replicas), p0, p1});
        }
        ++point;
      }
    }
  }
}

void run_high_points(Context& ctx, const PrimeTable& table) {
  const ExperimentConfig& cfg = ctx.cfg;
  CsvWriter out(ctx.path("high_points.csv"),
                {"alpha", "u", "gamma", "log_T", "loglog_T", "grid_size", "replicas", "median_measure",
                 "mean_measure", "normalized_log_measure", "inconclusive", "theory_exponent"});
  const std::vector<double> gammas = default_gammas(cfg);
  for (double u : cfg.u)
    for (double g : gammas)
      if (!(g < theory::gamma_star(cfg.alpha, u)))
        ctx.log("high-points: skipping gamma=" + format_double(g) + " at u=" + format_double(u) +
                " (not below gamma_star)");
  for (double L : cfg.log_T) {
    const FieldConfig fc = FieldConfig::with_min_grid(L, cfg.alpha, cfg.grid_oversample, cfg.seed);
    const FieldSampler sampler = FieldSampler::for_config(fc, table);
    const double ll = log_log(L);
    ctx.log("high-points: log_T=" + format_double(L) + " N=" + std::to_string(fc.grid_size));
    const auto vals = per_replica(sampler, cfg.replicas, cfg.workers,
                                  [&](std::size_t, std::span<const double> low, std::span<const double> high) {
                                    std::vector<double> res;
                                    std::vector<double> v(low.size());
                                    for (double u : cfg.u) {
                                      perturb_into(low, high, u, v);
                                      const double gs = theory::gamma_star(cfg.alpha, u);
                                      for (double g : gammas) {
                                        if (!(g < gs)) continue;
                                        std::size_t above = 0;
                                        for (double x : v) above += x > g * ll;
                                        res.push_back(static_cast<double>(above) / static_cast<double>(v.size()));
                                      }
                                    }
                                    return res;
                                  });
    std::size_t k = 0;
    std::vector<double> col(cfg.replicas);
    for (double u : cfg.u) {
      const double gs = theory::gamma_star(cfg.alpha, u);
      for (double g : gammas) {
        if (!(g < gs)) continue;
        for (std::size_t r = 0; r < cfg.replicas; ++r) col[r] = vals[r][k];
        ++k;
        const double med = median(col);
        const double mean = mean_and_se(col).mean;
        const bool inconclusive = !(med > 0.0);
        const double norm = inconclusive ? -INFINITY : std::log(med) / ll;
        out.row({cfg.alpha, u, g, L, ll, static_cast<std::uint64_t>(fc.grid_size),
                 static_cast<std::uint64_t>(cfg.replicas), med, mean, norm, inconclusive,
                 theory::high_points_exponent_closed(g, cfg.alpha, u)});
      }
    }
  }
}

bool run_validate(Context& ctx) {
  const PrimeTable table = sieve_primes(kValidationPrimeLimit);
  ctx.log("validate: running oracle suite");
  const ValidationReport rep = run_validation_suite(table, ctx.cfg.seed, ctx.cfg.workers);
  write_text_file(ctx.path("validate_report.json"), rep.to_json());
  for (const ValidationCheck& c : rep.checks) ctx.log(std::string(c.passed ? "  PASS " : "  FAIL ") + c.name);
  return rep.passed();
}

void write_envelope(const ExperimentResult& res, const fs::path& dir, const std::string& started_at) {
  json j;
  json cfg = json::object();
  for (const auto& [k, v] : res.config.to_map()) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = res.config.seed;
  j["version"] = RSB_VERSION;
  j["started_at"] = started_at;
  j["runtime_seconds"] = res.runtime_seconds;
  json outs = json::array();
  for (const std::string& o : res.outputs) outs.push_back(o);
  j["outputs"] = outs;
  j["complete"] = res.complete;
  if (!res.complete) j["error"] = res.error;
  if (res.validation_passed) j["validation_passed"] = *res.validation_passed;
  write_text_file((dir / kEnvelopeFile).string(), j.dump(2) + "\n");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* progress) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  ExperimentResult res;
  res.config = config;
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_invalid("cannot create output_dir '" + config.output_dir + "': " + ec.message());
  fs::remove(dir / kIncompleteMarker, ec);

  Context ctx{config, dir, progress, res.outputs};
  std::exception_ptr failure;
  try {
    const kernels::Isa isa = kernels::parse_isa(config.kernel);
    if (!kernels::isa_supported(isa)) throw_invalid("kernel '" + config.kernel + "' is not supported on this CPU");
    kernels::set_active_isa(isa);

    if (config.experiment != Experiment::Validate && config.experiment != Experiment::Theory) {
      if (config.log_T.empty() || config.beta.empty() || config.u.empty())
        throw_invalid("logT, beta and u must each have at least one value");
    }
    switch (config.experiment) {
      case Experiment::Theory:
        run_theory(ctx);
        break;
      case Experiment::FreeEnergy:
        run_free_energy(ctx, table_for_ladder(config.log_T));
        break;
      case Experiment::Overlap:
        run_overlap(ctx, table_for_ladder(config.log_T));
        break;
      case Experiment::HighPoints:
        run_high_points(ctx, table_for_ladder(config.log_T));
        break;
      case Experiment::Validate:
        res.validation_passed = run_validate(ctx);
        break;
    }
    res.complete = true;
  } catch (const std::exception& e) {
    res.complete = false;
    res.error = e.what();
    failure = std::current_exception();
  }
  res.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.outputs.push_back(kEnvelopeFile);
  res.envelope_path = (dir / kEnvelopeFile).string();
  if (!res.complete) write_text_file((dir / kIncompleteMarker).string(), res.error + "\n");
  write_envelope(res, dir, started_at);
  if (failure) std::rethrow_exception(failure);
  return res;
}

}  // namespace rsb
