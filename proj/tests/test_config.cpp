#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rsb/config.hpp"
#include "rsb/experiment.hpp"
#include "rsb/report.hpp"

using namespace rsb;

namespace {

bool has_issue(const ConfigParse& p, const std::string& key, const std::string& fragment) {
  for (const ConfigIssue& i : p.issues)
    if (i.key == key && i.message.find(fragment) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal config with defaults") {
  const ConfigParse p = parse_config("beta=4\nalpha=0.5\nu=0.0\nlogT=18.42\n");
  REQUIRE(p.config);
  CHECK(p.config->beta == std::vector<double>{4.0});
  CHECK(p.config->log_T == std::vector<double>{18.42});
  CHECK(p.config->replicas == 200);
  CHECK(p.config->experiment == Experiment::Theory);
}

TEST_CASE("range and presence errors") {
  const ConfigParse p = parse_config("u=1.5");
  CHECK_FALSE(p.config);
  CHECK(has_issue(p, "u", "(-1, 1)"));
  CHECK(has_issue(p, "beta", "missing"));

  const ConfigParse empty = parse_config("");
  for (const char* k : {"beta", "alpha", "u", "logT"}) CHECK(has_issue(empty, k, "missing required key"));

  const ConfigParse unknown = parse_config("beta=1\nalpha=0.5\nu=0\nlogT=10\ntemperature=3\n");
  CHECK(has_issue(unknown, "temperature", "unknown key"));

  const ConfigParse many = parse_config("beta=-1\nalpha=1\nu=0\nlogT=10,9\nreplicas=1\nworkers=0\nkernel=gpu\n");
  CHECK(has_issue(many, "beta", "(0, 64]"));
  CHECK(has_issue(many, "alpha", "(0, 1)"));
  CHECK(has_issue(many, "logT", "strictly increasing"));
  CHECK(has_issue(many, "replicas", "[2,"));
  CHECK(has_issue(many, "workers", "[1,"));
  CHECK(has_issue(many, "kernel", "scalar"));
  CHECK(many.issues.size() == 6);
}

TEST_CASE("comments, lists, ln() and overrides") {
  const std::string src =
      "# ladder\n"
      "experiment = free-energy\n"
      "beta = 1, 4   # two temperatures\n"
      "alpha = 0.5\n"
      "u = -0.2,0,0.2\n"
      "logT = ln(1e4), ln(10^6), 18.420680743952367\n"
      "seed = 18446744073709551615\n";
  const ConfigParse p = parse_config(src, {{"replicas", "50"}, {"beta", "2"}});
  REQUIRE(p.config);
  CHECK(p.config->experiment == Experiment::FreeEnergy);
  CHECK(p.config->beta == std::vector<double>{2.0});
  CHECK(p.config->u.size() == 3);
  CHECK(p.config->log_T[0] == doctest::Approx(std::log(1e4)));
  CHECK(p.config->log_T[1] == doctest::Approx(6.0 * std::log(10.0)));
  CHECK(p.config->replicas == 50);
  CHECK(p.config->seed == 18446744073709551615ULL);

  const ConfigParse again = parse_config(p.config->to_text());
  REQUIRE(again.config);
  CHECK(again.config->to_text() == p.config->to_text());
}

TEST_CASE("validate needs no parameter keys") {
  const ConfigParse p = parse_config("experiment=validate\n");
  CHECK(p.config);
}

TEST_CASE("theory experiment writes parseable CSVs") {
  const auto dir = std::filesystem::temp_directory_path() / "rsb_config_theory";
  std::filesystem::remove_all(dir);
  ConfigParse p = parse_config("beta=1,4\nalpha=0.5\nu=-0.5,0,0.5\nlogT=18.42\n", {{"output_dir", dir.string()}});
  REQUIRE(p.config);
  const ExperimentResult r = run_experiment(*p.config);
  CHECK(r.complete);
  for (const std::string& f : r.outputs) CHECK(std::filesystem::exists(dir / f));
  const CsvTable t = read_csv((dir / "theory.csv").string());
  CHECK(t.rows.size() == 6);
  CHECK(t.number(4, "limiting_free_energy") == doctest::Approx(0.25 * 0.5 * 2.25 + 0.25 * 0.5).epsilon(1e-12));
  CHECK(t.number(3, "overlap_p0") == 0.5);
  CHECK(t.rows[0][t.column("gamma_c")].empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("failed run leaves an incomplete marker") {
  const auto dir = std::filesystem::temp_directory_path() / "rsb_config_fail";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.experiment = Experiment::FreeEnergy;
  cfg.beta = {1.0};
  cfg.u = {0.0};
  cfg.log_T = {std::log(1e4)};
  cfg.output_dir = dir.string();
  cfg.kernel = "nonsense";
  CHECK_THROWS(run_experiment(cfg));
  CHECK(std::filesystem::exists(dir / kIncompleteMarker));
  CHECK(read_text_file((dir / kEnvelopeFile).string()).find("\"complete\": false") != std::string::npos);
  std::filesystem::remove_all(dir);
}
