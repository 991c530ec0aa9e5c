#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pdquad/config.hpp"

namespace pdq {

struct RunContext {
  Execution exec;
  bool full = false;                // allow fine-scale configs
  std::filesystem::path out;        // empty: use the config's output
  std::ostream* log = nullptr;      // progress messages
};

struct CheckResult {
  AcceptanceCheck check;
  double value = 0.0;  // NaN when the metric is missing
  bool pass = false;
};

struct RunOutcome {
  bool skipped = false;  // fine-scale config without --full
  bool pass = false;
  std::filesystem::path directory;
  std::map<std::string, double> metrics;
  std::vector<CheckResult> checks;
};

/// Runs the experiment, writes config.json, CSV tables and summary.json into
/// the output directory, then derives the verdict from the written files.
RunOutcome run_experiment(const RunConfig& config, const RunContext& ctx);

/// Re-derives metrics and verdict from a finished output directory.
RunOutcome recheck(const std::filesystem::path& directory);

std::map<std::string, double> metrics_from_files(const RunConfig& config, const std::filesystem::path& directory);
std::vector<CheckResult> evaluate(std::span<const AcceptanceCheck> checks, const std::map<std::string, double>& metrics);

/// "PASS <experiment>: metric=value in [min, max]; ..." on one line.
std::string verdict_line(const RunConfig& config, const RunOutcome& outcome);

/// Comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  std::vector<double> numbers(std::string_view name) const;
};
CsvTable read_csv(const std::filesystem::path& file);

}  // namespace pdq
