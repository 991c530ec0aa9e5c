#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pdquad/runner.hpp"

using namespace pdq;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::current_path() / "runner_out" / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("weights diagnostics run and recheck") {
  RunConfig c = parse_config(R"({"experiment": "weights-diag", "order": 2, "resolutions": [16, 20]})");
  const fs::path dir = fresh_dir("weights");
  const RunOutcome o = run_experiment(c, {.out = dir});
  CHECK(o.pass);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "weights_16.csv"));
  CHECK(o.metrics.at("max_residual") <= 1e-12);

  const RunOutcome again = recheck(dir);
  CHECK(again.pass);
  CHECK(again.metrics == o.metrics);
  CHECK(load_config(dir / "config.json") == c);

  const std::string line = verdict_line(c, o);
  CHECK(line.starts_with("PASS weights-diag: max_residual="));

  // Tampering with a written table changes the verdict.
  {
    std::ofstream os(dir / "weights_20.csv", std::ios::app);
    os << "0,30,1e-3,12,1\n";
  }
  CHECK_FALSE(recheck(dir).pass);
}

TEST_CASE("convergence run writes tables") {
  RunConfig c =
      parse_config(R"({"experiment": "converge-local", "order": 2, "resolutions": [12, 16, 20],
                       "acceptance": [{"metric": "solution_slope", "min": -10}]})");
  const fs::path dir = fresh_dir("local");
  const RunOutcome o = run_experiment(c, {.out = dir});
  const CsvTable t = read_csv(dir / "solution.csv");
  CHECK(t.rows.size() == 3);
  CHECK(t.numbers("h").size() == 3);
  CHECK(std::isfinite(o.metrics.at("truncation_slope")));
  CHECK(o.pass);
}

TEST_CASE("fine-scale configs are skipped without opt-in") {
  RunConfig c = parse_config(R"({"experiment": "weights-diag", "resolutions": [16]})");
  c.requires_full = true;
  const RunOutcome o = run_experiment(c, {.out = fresh_dir("skip")});
  CHECK(o.skipped);
  CHECK_FALSE(o.pass);
}

TEST_CASE("evaluate") {
  const std::vector<AcceptanceCheck> checks{{"a", 1.0, 2.0}, {"b", std::nullopt, 0.5}, {"missing", 0.0, {}}};
  const std::map<std::string, double> m{{"a", 1.5}, {"b", 0.7}};
  const auto r = evaluate(checks, m);
  REQUIRE(r.size() == 3);
  CHECK(r[0].pass);
  CHECK_FALSE(r[1].pass);
  CHECK_FALSE(r[2].pass);
  CHECK(std::isnan(r[2].value));
}

TEST_CASE("csv reader") {
  const fs::path d = fresh_dir("csv");
  fs::create_directories(d);
  {
    std::ofstream os(d / "t.csv");
    os << "x,y\n1,2\n3,abc\n";
  }
  const CsvTable t = read_csv(d / "t.csv");
  CHECK(t.column("y") == 1);
  CHECK(t.numbers("x") == std::vector<double>{1.0, 3.0});
  CHECK_THROWS(t.numbers("y"));
  CHECK_THROWS(t.column("z"));
  CHECK_THROWS(read_csv(d / "absent.csv"));
}
