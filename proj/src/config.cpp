#include "rsb/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "rsb/primes.hpp"

namespace rsb {

namespace {

constexpr double kMaxBeta = 64.0;
constexpr std::size_t kMaxReplicas = 10'000'000;
constexpr std::size_t kMaxPairs = 1'000'000;
constexpr int kMaxOversample = 64;
constexpr unsigned kMaxWorkers = 256;

const double kMaxLogT = std::log(static_cast<double>(kDefaultCutoffCap));

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// "18.42", "ln(1e8)" or "ln(10^8)".
std::optional<double> to_log_T(std::string_view s) {
  if (s.size() > 4 && s.substr(0, 3) == "ln(" && s.back() == ')') {
    const std::string_view inner = trim(s.substr(3, s.size() - 4));
    const auto caret = inner.find('^');
    if (caret != std::string_view::npos) {
      const auto base = to_double(trim(inner.substr(0, caret)));
      const auto expo = to_double(trim(inner.substr(caret + 1)));
      if (!base || !expo || *base <= 0.0) return std::nullopt;
      return *expo * std::log(*base);
    }
    const auto x = to_double(inner);
    if (!x || *x <= 0.0) return std::nullopt;
    return std::log(*x);
  }
  return to_double(s);
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

const std::string kRange_beta = "comma-separated reals in (0, 64]";
const std::string kRange_alpha = "real in (0, 1)";
const std::string kRange_u = "comma-separated reals in (-1, 1)";
const std::string kRange_logT =
    "strictly increasing comma-separated reals in (e, " + fmt(kMaxLogT) + "]; entries may be written ln(X)";
const std::string kRange_gamma = "comma-separated reals in (0, 2)";

struct Parser {
  std::vector<ConfigIssue> issues;

  void issue(const std::string& key, const std::string& msg) { issues.push_back({key, msg}); }

  std::optional<std::vector<double>> reals(const std::string& key, std::string_view value, double lo, double hi,
                                           bool lo_open, bool hi_open, const std::string& range, bool log_form) {
    std::vector<double> out;
    bool ok = true;
    for (std::string_view tok : split_list(value)) {
      const auto v = log_form ? to_log_T(tok) : to_double(tok);
      const bool in = v && (lo_open ? *v > lo : *v >= lo) && (hi_open ? *v < hi : *v <= hi);
      if (!in) {
        issue(key, "value '" + std::string(tok) + "' out of range; accepted: " + range);
        ok = false;
        continue;
      }
      out.push_back(*v);
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<std::uint64_t> integer(const std::string& key, std::string_view value, std::uint64_t lo,
                                       std::uint64_t hi) {
    const auto v = to_uint(value);
    if (!v || *v < lo || *v > hi) {
      issue(key, "value '" + std::string(value) + "' out of range; accepted: integer in [" + std::to_string(lo) +
                     ", " + std::to_string(hi) + "]");
      return std::nullopt;
    }
    return v;
  }
};

}  // namespace

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::Theory: return "theory";
    case Experiment::Overlap: return "overlap";
    case Experiment::FreeEnergy: return "free-energy";
    case Experiment::HighPoints: return "high-points";
    case Experiment::Validate: return "validate";
  }
  return "theory";
}

std::optional<Experiment> parse_experiment(std::string_view name) noexcept {
  for (Experiment e : {Experiment::Theory, Experiment::Overlap, Experiment::FreeEnergy, Experiment::HighPoints,
                       Experiment::Validate})
    if (to_string(e) == name) return e;
  return std::nullopt;
}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"experiment", "one of theory, overlap, free-energy, high-points, validate"},
      {"beta", kRange_beta + " (required)"},
      {"alpha", kRange_alpha + " (required)"},
      {"u", kRange_u + " (required)"},
      {"logT", kRange_logT + " (required)"},
      {"gamma", kRange_gamma},
      {"replicas", "integer in [2, " + std::to_string(kMaxReplicas) + "]"},
      {"pairs_per_replica", "integer in [1, " + std::to_string(kMaxPairs) + "]"},
      {"grid_oversample", "integer in [1, " + std::to_string(kMaxOversample) + "]"},
      {"seed", "integer in [0, 18446744073709551615]"},
      {"output_dir", "non-empty path"},
      {"workers", "integer in [1, " + std::to_string(kMaxWorkers) + "]"},
      {"kernel", "one of scalar, avx2, auto"},
  };
  return keys;
}

std::string ConfigParse::describe() const {
  std::string out;
  for (const ConfigIssue& i : issues) out += i.key + ": " + i.message + "\n";
  return out;
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["experiment"] = std::string(rsb::to_string(experiment));
  m["logT"] = fmt_list(log_T);
  m["beta"] = fmt_list(beta);
  m["alpha"] = fmt(alpha);
  m["u"] = fmt_list(u);
  if (!gamma.empty()) m["gamma"] = fmt_list(gamma);
  m["replicas"] = std::to_string(replicas);
  m["pairs_per_replica"] = std::to_string(pairs_per_replica);
  m["grid_oversample"] = std::to_string(grid_oversample);
  m["seed"] = std::to_string(seed);
  m["output_dir"] = output_dir;
  m["workers"] = std::to_string(workers);
  m["kernel"] = kernel;
  return m;
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

ConfigParse parse_config(std::string_view source, const std::map<std::string, std::string>& overrides) {
  Parser ps;
  std::map<std::string, std::string> values;
  std::set<std::string> known;
  for (const auto& [k, _] : config_keys()) known.insert(k);

  std::size_t line_no = 0;
  while (!source.empty()) {
    const auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source.remove_prefix(nl == std::string_view::npos ? source.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      ps.issue("line " + std::to_string(line_no), "expected 'key = value', got '" + std::string(line) + "'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!known.count(key)) {
      ps.issue(key, "unknown key");
      continue;
    }
    if (values.count(key)) ps.issue(key, "duplicate key on line " + std::to_string(line_no));
    values[key] = std::string(value);
  }
  for (const auto& [k, v] : overrides) {
    if (!known.count(k)) {
      ps.issue(k, "unknown key");
      continue;
    }
    values[k] = v;
  }

  ExperimentConfig cfg;
  if (auto it = values.find("experiment"); it != values.end()) {
    if (auto e = parse_experiment(it->second))
      cfg.experiment = *e;
    else
      ps.issue("experiment", "value '" + it->second + "' not accepted; accepted: " + config_keys()[0].second);
  }
  if (cfg.experiment != Experiment::Validate) {
    for (const char* req : {"beta", "alpha", "u", "logT"})
      if (!values.count(req)) ps.issue(req, "missing required key");
  }

  if (auto it = values.find("beta"); it != values.end())
    if (auto v = ps.reals("beta", it->second, 0.0, kMaxBeta, true, false, kRange_beta, false)) cfg.beta = *v;
  if (auto it = values.find("alpha"); it != values.end())
    if (auto v = ps.reals("alpha", it->second, 0.0, 1.0, true, true, kRange_alpha, false)) {
      if (v->size() != 1)
        ps.issue("alpha", "expects a single value; accepted: " + kRange_alpha);
      else
        cfg.alpha = v->front();
    }
  if (auto it = values.find("u"); it != values.end())
    if (auto v = ps.reals("u", it->second, -1.0, 1.0, true, true, kRange_u, false)) cfg.u = *v;
  if (auto it = values.find("logT"); it != values.end())
    if (auto v = ps.reals("logT", it->second, std::numbers::e, kMaxLogT, true, false, kRange_logT, true)) {
      bool increasing = true;
      for (std::size_t i = 1; i < v->size(); ++i) increasing = increasing && (*v)[i] > (*v)[i - 1];
      if (!increasing)
        ps.issue("logT", "ladder must be strictly increasing; accepted: " + kRange_logT);
      else
        cfg.log_T = *v;
    }
  if (auto it = values.find("gamma"); it != values.end())
    if (auto v = ps.reals("gamma", it->second, 0.0, 2.0, true, true, kRange_gamma, false)) cfg.gamma = *v;
  if (auto it = values.find("replicas"); it != values.end())
    if (auto v = ps.integer("replicas", it->second, 2, kMaxReplicas)) cfg.replicas = *v;
  if (auto it = values.find("pairs_per_replica"); it != values.end())
    if (auto v = ps.integer("pairs_per_replica", it->second, 1, kMaxPairs)) cfg.pairs_per_replica = *v;
  if (auto it = values.find("grid_oversample"); it != values.end())
    if (auto v = ps.integer("grid_oversample", it->second, 1, kMaxOversample)) cfg.grid_oversample = static_cast<int>(*v);
  if (auto it = values.find("seed"); it != values.end())
    if (auto v = ps.integer("seed", it->second, 0, std::numeric_limits<std::uint64_t>::max())) cfg.seed = *v;
  if (auto it = values.find("workers"); it != values.end())
    if (auto v = ps.integer("workers", it->second, 1, kMaxWorkers)) cfg.workers = static_cast<unsigned>(*v);
  if (auto it = values.find("output_dir"); it != values.end()) {
    if (it->second.empty())
      ps.issue("output_dir", "empty value; accepted: non-empty path");
    else
      cfg.output_dir = it->second;
  }
  if (auto it = values.find("kernel"); it != values.end()) {
    if (it->second == "scalar" || it->second == "avx2" || it->second == "auto")
      cfg.kernel = it->second;
    else
      ps.issue("kernel", "value '" + it->second + "' not accepted; accepted: one of scalar, avx2, auto");
  }

  ConfigParse out;
  out.issues = std::move(ps.issues);
  if (out.issues.empty()) out.config = std::move(cfg);
  return out;
}

}  // namespace rsb
