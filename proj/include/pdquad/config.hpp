#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdquad/experiments.hpp"

namespace pdq {

/// Validation failure; `path` is the dotted key path ("kalthoff.dt").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path(std::move(path)) {}
  std::string path;
};

enum class Dimension { length, time, pressure, density, velocity, energy_per_area };

std::string_view si_unit(Dimension d);

/// Parses "<number> <unit>" into SI, e.g. "25 mm" -> 0.025.
double parse_quantity(std::string_view text, Dimension d, const std::string& path = {});
/// "<value> <si unit>" in shortest round-trip form.
std::string format_quantity(double si_value, Dimension d);

enum class Experiment { converge_nonlocal, converge_local, patch_crack, typeI, kalthoff, weights_diag };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view tag, const std::string& path = "experiment");

/// Critical bond strain rule for dynamic fracture.
struct DamageConfig {
  enum class Model { none, fixed, scaled_horizon, fracture_energy };
  Model model = Model::none;
  double critical_strain = 0.0;  // fixed
  double coefficient = 0.0;      // scaled_horizon: s0 = coefficient / sqrt(delta / horizon_unit)
  double horizon_unit = 1.0;     // metres
  double fracture_energy = 0.0;  // J/m^2

  double resolve(const MaterialModel& material, double horizon) const;
  bool operator==(const DamageConfig&) const = default;
};

/// Bound on one named result metric; either side may be open.
struct AcceptanceCheck {
  std::string metric;
  std::optional<double> min;
  std::optional<double> max;

  bool operator==(const AcceptanceCheck&) const = default;
};

struct RunConfig {
  Experiment experiment = Experiment::converge_local;
  DiscretizationOptions discretization;
  std::vector<int> resolutions;
  /// Fine-scale runs are skipped unless the caller opts in.
  bool requires_full = false;
  TypeIOptions typeI;
  KalthoffOptions kalthoff;
  DamageConfig damage;
  std::vector<AcceptanceCheck> acceptance;
  std::filesystem::path output = "out";

  bool operator==(const RunConfig&) const = default;
};

/// Checks implied by the experiment when the file gives none.
std::vector<AcceptanceCheck> default_acceptance(const RunConfig& c);

/// Strict parse: unknown keys, sections that do not belong to the experiment,
/// missing units and wrong unit dimensions all throw ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& file);
/// Normalized JSON (SI units, every field explicit).
std::string serialize_config(const RunConfig& c);

}  // namespace pdq
