// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "rsb/field.hpp"
#include "rsb/gibbs.hpp"
#include "rsb/numeric.hpp"
#include "rsb/oracle.hpp"
#include "rsb/primes.hpp"
#include "rsb/report.hpp"
#include "rsb/theory.hpp"

using namespace rsb;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr double kAlpha = 0.5;
constexpr std::size_t kLadderReplicas = 2000;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string f(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

struct Rung {
  double log_T = 0.0;
  std::vector<FieldSample> samples;
};

void criterion_theory() {
  const auto t0 = std::chrono::steady_clock::now();
  double gap = 0.0;
  double jump = 0.0;
  double du = 0.0;
  double estar = 0.0;
  for (double a : {0.2, 0.5, 0.8}) {
    for (double u : {-0.5, -0.2, 0.0, 0.2, 0.5}) {
      for (int b = 1; b <= 12; ++b) {
        const theory::TheoryPoint p{0.5 * b, a, u, {}};
        gap = std::max(gap, std::abs(theory::variational_free_energy(p, 4000).value - theory::limiting_free_energy(p)));
      }
      estar = std::max(estar, std::abs(theory::high_points_exponent_closed(theory::gamma_star(a, u), a, u) + 1.0));
      if (u >= 0.0 && theory::gamma_c(a, u) < theory::gamma_star(a, u)) {
        const double gc = theory::gamma_c(a, u);
        jump = std::max(jump, std::abs(theory::high_points_exponent_closed(gc - 1e-8, a, u) -
                                       theory::high_points_exponent_closed(gc + 1e-8, a, u)));
        jump = std::max(jump, std::abs(theory::lambda_star(gc - 1e-8, a, u) - theory::lambda_star(gc + 1e-8, a, u)));
      }
    }
    for (int b = 1; b <= 12; ++b) {
      const double beta = 0.5 * b;
      jump = std::max(jump, std::abs(theory::limiting_free_energy({beta, a, -1e-8, {}}) -
                                     theory::limiting_free_energy({beta, a, 1e-8, {}})));
      // Differentiability at u = 0: symmetric difference quotients on both sides.
      const double h = 1e-5;
      const double f0 = theory::limiting_free_energy({beta, a, 0.0, {}});
      const double left = (f0 - theory::limiting_free_energy({beta, a, -h, {}})) / h;
      const double right = (theory::limiting_free_energy({beta, a, h, {}}) - f0) / h;
      du = std::max(du, std::abs(left - right) - 2.0 * h * beta * beta);
    }
  }
  for (double sigma : {0.5, 1.0, std::sqrt(1.625)})
    jump = std::max(jump, std::abs(theory::f_sigma(2.0 / sigma - 1e-8, sigma) - theory::f_sigma(2.0 / sigma + 1e-8, sigma)));
  const double rt = seconds_since(t0);
  du = std::max(du, 0.0);
  const bool pass = gap <= 1e-6 && jump <= 1e-6 && du <= 1e-6 && estar <= 1e-9 && rt < 5.0;
  report(1, "theory consistency", pass,
         "max|var-lim|=" + f(gap) + " max jump=" + f(jump) + " du gap=" + f(du) + " |E(g*)+1|=" + f(estar) +
             " runtime=" + f(rt, 3) + "s");
}

void criterion_pipeline() {
  double worst = 0.0;
  for (double a : {0.2, 0.5, 0.8})
    for (double beta : {3.0, 4.0, 6.0}) {
      const theory::TheoryPoint p{beta, a, 0.0, {}};
      const double lhs = 2.0 / (beta * beta) * theory::du_limiting_free_energy(p, theory::Side::Right);
      worst = std::max(worst, std::abs(lhs - 2.0 * a / beta));
    }
  report(2, "pipeline identity", worst <= 1e-9, "max error=" + f(worst));
}

void criterion_covariance_mgf(const PrimeTable& table) {
  const auto t0 = std::chrono::steady_clock::now();
  FieldConfig cfg{std::log(1e6), kAlpha, 256, 8, kSeed};
  const auto samples = sample_ensemble(cfg, table, 10'000, workers());
  const PrimeWindow window = ScaleRange{0.0, 1.0, cfg.log_T}.window();
  const oracle::CovarianceCheck cc = oracle::covariance_check(samples, table, window);
  bool mgf_ok = true;
  double worst_z = 0.0;
  const std::size_t lag = 26;
  for (double l : {0.0, 0.5, 1.0})
    for (double lp : {0.0, 0.5, 1.0}) {
      const double exact = oracle::mgf_product_formula(l, lp, 0.0, static_cast<double>(lag) / 256.0, table, window);
      const oracle::McEstimate mc = oracle::mgf_from_samples(samples, l, lp, lag);
      const double z = mc.std_error > 0 ? std::abs(mc.mean - exact) / mc.std_error : (mc.mean == exact ? 0.0 : 1e9);
      worst_z = std::max(worst_z, z);
      mgf_ok = mgf_ok && z <= 3.0;
    }
  const double rt = seconds_since(t0);
  report(3, "covariance/MGF oracle", cc.fraction_within >= 0.95 && mgf_ok && rt < 600.0,
         "pairs within 3SE=" + f(cc.fraction_within) + " of " + std::to_string(cc.pairs_tested) +
             " worst MGF z=" + f(worst_z, 3) + " runtime=" + f(rt, 3) + "s");
}

void criterion_ibp(const PrimeTable& table) {
  const double lin = oracle::integration_by_parts_residual(oracle::TestFunction::Linear, 1.0).residual;
  const double poly = oracle::integration_by_parts_residual(oracle::TestFunction::Polynomial, 0.0).residual;
  const FieldConfig cfg = FieldConfig::with_min_grid(std::log(1e3), kAlpha, 8, kSeed);
  bool ok = lin <= 1e-12 && poly <= 1e-12;
  std::string detail = "linear=" + f(lin) + " poly=" + f(poly);
  for (std::uint64_t p : {2, 3, 5}) {
    const oracle::SinglePrimeCheck r = oracle::single_prime_derivative_check(p, 2.0, cfg, table, 100'000, workers());
    const bool within = std::abs(r.difference) <= 3.0 * r.combined_se;
    ok = ok && within;
    detail += " p=" + std::to_string(p) + ":" + f(r.derivative) + " vs " + f(r.overlap_side) + " (z=" +
              f(r.difference / r.combined_se, 3) + ")";
  }
  report(4, "integration by parts", ok, detail);
}

void criterion_free_energy(const std::vector<Rung>& ladder) {
  bool ok = true;
  std::string detail;
  for (double beta : {1.0, 4.0}) {
    const double target = theory::f_sigma(beta, 1.0);
    double prev = INFINITY;
    detail += "beta=" + f(beta, 2) + " gaps:";
    double last = 0.0;
    for (const Rung& r : ladder) {
      const FreeEnergyEstimate e = free_energy_from_samples(r.samples, beta, 0.0);
      const double gap = std::abs(e.normalized() - target);
      ok = ok && gap <= prev;
      prev = gap;
      last = gap;
      detail += " " + f(gap, 3);
    }
    ok = ok && last <= 0.35;
    detail += "; ";
  }
  report(5, "free energy trend", ok, detail + "(top-rung tolerance 0.35)");
}

void criterion_overlap(const PrimeTable& table, const Rung& top) {
  const std::size_t n = top.samples.front().low.size();
  const OverlapTable ot = OverlapTable::for_log_T(table, top.log_T, n);
  auto law = [&](double beta) {
    std::vector<OverlapHistogram> parts;
    parts.reserve(top.samples.size());
    for (const FieldSample& s : top.samples) parts.push_back(enumerate_overlap_law(gibbs_weights(s.full(), beta), ot));
    return merge_overlap_histograms(parts);
  };
  const OverlapHistogram cold = law(4.0);
  const OverlapHistogram hot = law(0.5);
  const double mid_cold = cold.mass_within(0.25, 0.75);
  const double mid_hot = hot.mass_within(0.25, 0.75);
  const double below_half = cold.mass_within(-1.0, 0.5);
  std::vector<std::size_t> order(cold.bins());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cold.masses[a] > cold.masses[b]; });
  const std::size_t zero_hi = cold.bin_of(0.0);
  const std::size_t zero_lo = zero_hi - 1;
  const std::size_t one = cold.bins() - 1;
  auto near_zero = [&](std::size_t b) { return b == zero_lo || b == zero_hi; };
  const bool top_two = (near_zero(order[0]) && order[1] == one) || (order[0] == one && near_zero(order[1]));
  const bool pass = mid_cold < mid_hot && std::abs(below_half - 0.5) <= 0.15 && top_two;
  report(6, "overlap concentration", pass,
         "mid(0.25,0.75): beta4=" + f(mid_cold) + " beta0.5=" + f(mid_hot) + " P(rho<1/2)=" + f(below_half) +
             " top bins=[" + f(cold.bin_edges[order[0]], 3) + "," + f(cold.bin_edges[order[0] + 1], 3) + ") " +
             f(cold.masses[order[0]], 3) + ", [" + f(cold.bin_edges[order[1]], 3) + "," +
             f(cold.bin_edges[order[1] + 1], 3) + ") " + f(cold.masses[order[1]], 3) +
             ", mass next to 0=" + f(cold.masses[zero_lo] + cold.masses[zero_hi], 3));
}

void criterion_high_points(const std::vector<Rung>& ladder) {
  bool ok = true;
  std::string detail = "u=0:";
  for (double g : {0.3, 0.5, 0.7}) {
    double prev = INFINITY;
    detail += " g=" + f(g, 2) + "[";
    for (const Rung& r : ladder) {
      const oracle::MeasureEstimate m = oracle::high_points_from_samples(r.samples, 0.0, g);
      const double gap = std::abs(m.normalized_log_measure + g * g);
      ok = ok && !m.inconclusive && gap <= prev;
      prev = gap;
      detail += m.inconclusive ? " inc" : " " + f(m.normalized_log_measure, 3);
    }
    ok = ok && prev <= 0.15;
    detail += "]";
  }
  const double u = 0.5;
  const double V = theory::TheoryPoint{1.0, kAlpha, u, {}}.variance_factor();
  const double below = 1.0;
  const double above = 1.2;
  const Rung& top = ladder.back();
  const oracle::MeasureEstimate mb = oracle::high_points_from_samples(top.samples, u, below);
  const oracle::MeasureEstimate ma = oracle::high_points_from_samples(top.samples, u, above);
  // Residual against the first-branch formula -g^2/V: zero below gamma_c,
  // negative above it.
  const double rb = mb.normalized_log_measure + below * below / V;
  const double ra = ma.normalized_log_measure + above * above / V;
  const bool sign_ok = !mb.inconclusive && !ma.inconclusive && ra < rb;
  ok = ok && sign_ok;
  detail += "; u=0.5 residuals vs -g^2/V: g=1.0 " + (mb.inconclusive ? std::string("inc") : f(rb, 3)) + ", g=1.2 " +
            (ma.inconclusive ? std::string("inc") : f(ra, 3)) + " (gamma_c=" + f(theory::gamma_c(kAlpha, u), 4) + ")";
  report(7, "high-point exponents", ok, detail);
}

void criterion_determinism(const std::string& cli, const std::filesystem::path& work) {
  namespace fs = std::filesystem;
  bool ok = true;
  std::vector<std::string> reports;
  for (unsigned w : {1u, 8u}) {
    const fs::path dir = work / ("validate_w" + std::to_string(w));
    fs::remove_all(dir);
    const std::string cmd = "\"" + cli + "\" validate -q --seed 1 --workers " + std::to_string(w) + " --output_dir \"" +
                            dir.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    ok = ok && rc == 0;
    reports.push_back(fs::exists(dir / "validate_report.json") ? read_text_file((dir / "validate_report.json").string())
                                                              : std::string());
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  report(8, "determinism", ok && same,
         std::string("validate exit codes ") + (ok ? "0" : "nonzero") + ", reports " +
             (same ? "byte-identical" : "differ") + " (" + std::to_string(reports[0].size()) + " bytes)");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::filesystem::path work = std::filesystem::temp_directory_path() / "rsb_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string a = argv[i];
    if (a == "--cli") cli = argv[i + 1];
    if (a == "--work") work = argv[i + 1];
  }
  std::filesystem::create_directories(work);

  criterion_theory();
  criterion_pipeline();

  const PrimeTable table = sieve_primes(100'000'000);
  criterion_covariance_mgf(table);
  criterion_ibp(table);

  std::vector<Rung> ladder;
  for (double T : {1e4, 1e6, 1e8}) {
    Rung r;
    r.log_T = std::log(T);
    const FieldConfig cfg = FieldConfig::with_min_grid(r.log_T, kAlpha, 8, kSeed);
    r.samples = sample_ensemble(cfg, table, kLadderReplicas, workers());
    ladder.push_back(std::move(r));
  }
  criterion_free_energy(ladder);
  criterion_overlap(table, ladder.back());
  criterion_high_points(ladder);

  if (cli.empty())
    report(8, "determinism", false, "no --cli path given");
  else
    criterion_determinism(cli, work);

  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
