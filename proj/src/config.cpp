#include "pdquad/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pdquad/format.hpp"

namespace pdq {

using nlohmann::json;

namespace {

struct UnitEntry {
  std::string_view name;
  double factor;
};

std::span<const UnitEntry> units_of(Dimension d) {
  static constexpr UnitEntry length[] = {{"m", 1.0}, {"dm", 0.1}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}};
  static constexpr UnitEntry time[] = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  static constexpr UnitEntry pressure[] = {{"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}};
  static constexpr UnitEntry density[] = {{"kg/m^3", 1.0}, {"g/cm^3", 1e3}};
  static constexpr UnitEntry velocity[] = {{"m/s", 1.0}, {"mm/s", 1e-3}, {"km/s", 1e3}, {"mm/us", 1e3}};
  static constexpr UnitEntry energy[] = {{"J/m^2", 1.0}, {"N/m", 1.0}, {"kJ/m^2", 1e3}};
  switch (d) {
    case Dimension::length: return length;
    case Dimension::time: return time;
    case Dimension::pressure: return pressure;
    case Dimension::density: return density;
    case Dimension::velocity: return velocity;
    case Dimension::energy_per_area: return energy;
  }
  return {};
}

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::pressure: return "pressure";
    case Dimension::density: return "density";
    case Dimension::velocity: return "velocity";
    case Dimension::energy_per_area: return "energy per area";
  }
  return "?";
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

/// Object reader that remembers which keys were consumed so leftovers can be
/// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  std::string path(std::string_view key) const { return join(path_, key); }

  const json& at(std::string_view key) {
    const std::string k(key);
    if (!j_.contains(k)) throw ConfigError(path(key), "missing required key");
    used_.insert(k);
    return j_.at(k);
  }

  double number(std::string_view key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    return v.get<double>();
  }
  double number(std::string_view key, double fallback) { return has(key) ? number(key) : fallback; }

  long long integer(std::string_view key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(std::string_view key, long long fallback) { return has(key) ? integer(key) : fallback; }

  std::string text(std::string_view key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(std::string_view key, std::string fallback) { return has(key) ? text(key) : fallback; }

  double quantity(std::string_view key, Dimension d) {
    const json& v = at(key);
    if (!v.is_string())
      throw ConfigError(path(key), "expected a quantity with a unit, e.g. \"1 " + std::string(si_unit(d)) + "\"");
    return parse_quantity(v.get<std::string>(), d, path(key));
  }
  double quantity(std::string_view key, Dimension d, double fallback) { return has(key) ? quantity(key, d) : fallback; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

int positive_int(Section& s, std::string_view key, long long fallback, long long min = 1) {
  const long long v = s.integer(key, fallback);
  if (v < min || v > std::numeric_limits<int>::max())
    throw ConfigError(s.path(key), "must be an integer >= " + std::to_string(min));
  return static_cast<int>(v);
}

double positive(Section& s, std::string_view key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(s.path(key), "must be positive");
  return v;
}

void require_quarter_poisson(Section& s, std::string_view key, double nu) {
  if (nu != 0.25) throw ConfigError(s.path(key), "bond-based kernel requires Poisson ratio 0.25");
}

void parse_solver(Section s, SolverOptions& o) {
  const std::string kind = s.text("kind", "sparse_lu");
  if (kind == "sparse_lu")
    o.kind = SolverKind::sparse_lu;
  else if (kind == "gmres")
    o.kind = SolverKind::gmres;
  else
    throw ConfigError(s.path("kind"), "expected sparse_lu or gmres");
  o.rel_tol = positive(s, "rel_tol", s.number("rel_tol", o.rel_tol));
  o.max_iter = positive_int(s, "max_iter", o.max_iter);
  o.restart = positive_int(s, "restart", o.restart);
  s.finish();
}

void parse_typeI(Section s, TypeIOptions& t) {
  t.crack.sigma0 = s.quantity("sigma0", Dimension::pressure, t.crack.sigma0);
  t.crack.half_length = positive(s, "half_length", s.quantity("half_length", Dimension::length, t.crack.half_length));
  t.crack.bulk_modulus =
      positive(s, "bulk_modulus", s.quantity("bulk_modulus", Dimension::pressure, t.crack.bulk_modulus));
  t.crack.poisson_ratio = s.number("poisson_ratio", t.crack.poisson_ratio);
  require_quarter_poisson(s, "poisson_ratio", t.crack.poisson_ratio);
  t.box = positive(s, "box", s.quantity("box", Dimension::length, t.box));
  if (!(t.box > t.crack.half_length)) throw ConfigError(s.path("box"), "box must enclose the crack");
  t.profile_resolution = positive_int(s, "profile_resolution", t.profile_resolution, 2);
  t.tip_exclusion = s.number("tip_exclusion", t.tip_exclusion);
  if (!(t.tip_exclusion >= 0.0)) throw ConfigError(s.path("tip_exclusion"), "must be non-negative");
  s.finish();
}

void parse_material(Section s, MaterialModel& m) {
  m.poisson_ratio = s.number("poisson_ratio", m.poisson_ratio);
  require_quarter_poisson(s, "poisson_ratio", m.poisson_ratio);
  if (s.has("bulk_modulus") && s.has("youngs_modulus"))
    throw ConfigError(s.path("youngs_modulus"), "give either bulk_modulus or youngs_modulus");
  if (s.has("youngs_modulus"))
    m.bulk_modulus = positive(s, "youngs_modulus", s.quantity("youngs_modulus", Dimension::pressure)) /
                     (3.0 * (1.0 - 2.0 * m.poisson_ratio));
  else
    m.bulk_modulus = positive(s, "bulk_modulus", s.quantity("bulk_modulus", Dimension::pressure, m.bulk_modulus));
  m.density = positive(s, "density", s.quantity("density", Dimension::density, m.density));
  s.finish();
}

void parse_kalthoff(Section s, KalthoffOptions& k) {
  k.width = positive(s, "width", s.quantity("width", Dimension::length, k.width));
  k.height = positive(s, "height", s.quantity("height", Dimension::length, k.height));
  k.nx = positive_int(s, "nx", k.nx, 2);
  k.ny = positive_int(s, "ny", k.ny, 2);
  k.notch_offset = positive(s, "notch_offset", s.quantity("notch_offset", Dimension::length, k.notch_offset));
  k.notch_length = positive(s, "notch_length", s.quantity("notch_length", Dimension::length, k.notch_length));
  if (!(k.notch_offset < 0.5 * k.width)) throw ConfigError(s.path("notch_offset"), "notches must lie inside the plate");
  if (!(k.notch_length < k.height)) throw ConfigError(s.path("notch_length"), "notch must end inside the plate");
  k.impact_speed = s.quantity("impact_speed", Dimension::velocity, k.impact_speed);
  if (s.has("material")) parse_material(Section(s.at("material"), s.path("material")), k.material);
  k.dt = positive(s, "dt", s.quantity("dt", Dimension::time, k.dt));
  k.steps = positive_int(s, "steps", k.steps);
  const std::string strain = s.text("strain", "deformed_length");
  if (strain == "deformed_length")
    k.strain = StrainMeasure::deformed_length;
  else if (strain == "relative_displacement")
    k.strain = StrainMeasure::relative_displacement;
  else
    throw ConfigError(s.path("strain"), "expected deformed_length or relative_displacement");
  k.angle_radius_h = positive(s, "angle_radius", s.number("angle_radius", k.angle_radius_h));
  k.damage_threshold = s.number("damage_threshold", k.damage_threshold);
  if (!(k.damage_threshold > 0.0 && k.damage_threshold <= 1.0))
    throw ConfigError(s.path("damage_threshold"), "must lie in (0, 1]");
  k.snapshot_every = positive_int(s, "snapshot_every", k.snapshot_every, 0);
  s.finish();
}

void parse_damage(Section s, DamageConfig& d) {
  const std::string model = s.text("model");
  if (model == "none") {
    d.model = DamageConfig::Model::none;
  } else if (model == "fixed") {
    d.model = DamageConfig::Model::fixed;
    d.critical_strain = s.number("critical_strain");
    if (!(d.critical_strain >= 0.0)) throw ConfigError(s.path("critical_strain"), "must be non-negative");
  } else if (model == "scaled_horizon") {
    d.model = DamageConfig::Model::scaled_horizon;
    d.coefficient = s.number("coefficient");
    if (!(d.coefficient >= 0.0)) throw ConfigError(s.path("coefficient"), "must be non-negative");
    d.horizon_unit = positive(s, "horizon_unit", s.quantity("horizon_unit", Dimension::length));
  } else if (model == "fracture_energy") {
    d.model = DamageConfig::Model::fracture_energy;
    d.fracture_energy = s.quantity("fracture_energy", Dimension::energy_per_area);
    if (!(d.fracture_energy >= 0.0)) throw ConfigError(s.path("fracture_energy"), "must be non-negative");
  } else {
    throw ConfigError(s.path("model"), "expected none, fixed, scaled_horizon or fracture_energy");
  }
  s.finish();
}

std::vector<AcceptanceCheck> parse_acceptance(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<AcceptanceCheck> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Section s(j[i], path + "[" + std::to_string(i) + "]");
    AcceptanceCheck c;
    c.metric = s.text("metric");
    if (s.has("min")) c.min = s.number("min");
    if (s.has("max")) c.max = s.number("max");
    if (!c.min && !c.max) throw ConfigError(s.path("metric"), "check needs min or max");
    s.finish();
    out.push_back(std::move(c));
  }
  return out;
}

const char* damage_model_name(DamageConfig::Model m) {
  switch (m) {
    case DamageConfig::Model::none: return "none";
    case DamageConfig::Model::fixed: return "fixed";
    case DamageConfig::Model::scaled_horizon: return "scaled_horizon";
    case DamageConfig::Model::fracture_energy: return "fracture_energy";
  }
  return "none";
}

}  // namespace

std::string_view si_unit(Dimension d) { return units_of(d).front().name; }

double parse_quantity(std::string_view text, Dimension d, const std::string& path) {
  const auto first = text.find_first_not_of(' ');
  if (first == std::string_view::npos) throw ConfigError(path, "empty quantity");
  text.remove_prefix(first);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{}) throw ConfigError(path, "quantity does not start with a number: \"" + std::string(text) + "\"");
  std::string_view unit(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
  const auto a = unit.find_first_not_of(' ');
  if (a == std::string_view::npos || a == 0)
    throw ConfigError(path, "missing unit (expected a " + std::string(dimension_name(d)) + " unit such as " +
                                std::string(si_unit(d)) + ")");
  unit = unit.substr(a, unit.find_last_not_of(' ') - a + 1);
  for (const auto& u : units_of(d))
    if (u.name == unit) return value * u.factor;
  throw ConfigError(path, "unit '" + std::string(unit) + "' is not a " + std::string(dimension_name(d)) + " unit");
}

std::string format_quantity(double si_value, Dimension d) { return fmt_double(si_value) + " " + std::string(si_unit(d)); }

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::converge_nonlocal: return "converge-nonlocal";
    case Experiment::converge_local: return "converge-local";
    case Experiment::patch_crack: return "patch-crack";
    case Experiment::typeI: return "typeI";
    case Experiment::kalthoff: return "kalthoff";
    case Experiment::weights_diag: return "weights-diag";
  }
  return "?";
}

Experiment parse_experiment(std::string_view tag, const std::string& path) {
  for (const auto e : {Experiment::converge_nonlocal, Experiment::converge_local, Experiment::patch_crack,
                       Experiment::typeI, Experiment::kalthoff, Experiment::weights_diag})
    if (to_string(e) == tag) return e;
  throw ConfigError(path, "unknown experiment '" + std::string(tag) + "'");
}

double DamageConfig::resolve(const MaterialModel& material, double horizon) const {
  switch (model) {
    case Model::none: return std::numeric_limits<double>::infinity();
    case Model::fixed: return critical_strain;
    case Model::scaled_horizon: return coefficient / std::sqrt(horizon / horizon_unit);
    case Model::fracture_energy: {
      MaterialModel m = material;
      m.fracture_energy = fracture_energy;
      return pdq::critical_strain(m, horizon);
    }
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<AcceptanceCheck> default_acceptance(const RunConfig& c) {
  const int n = c.discretization.order;
  switch (c.experiment) {
    case Experiment::converge_nonlocal: {
      // Odd orders converge like the even order below them.
      const double target = n % 2 == 0 ? n : n - 1;
      return {{"truncation_slope", n - 1 - 0.4, std::nullopt}, {"solution_slope", target - 0.5, target + 0.5}};
    }
    case Experiment::converge_local:
      return {{"truncation_slope", 1.6, 2.4}, {"solution_slope", 1.6, 2.4}};
    case Experiment::patch_crack:
      return {{"l2_slope", 0.7, 1.3}, {"sup_slope", 0.7, 1.3}};
    case Experiment::typeI:
      return {{"slope_y0", 0.6, 1.4}, {"slope_x0", 0.6, 1.4}, {"profile_deviation", std::nullopt, 0.05}};
    case Experiment::kalthoff:
      return {{"left_angle", 62.0, 74.0}, {"right_angle", 62.0, 74.0}, {"fragments", 3.0, 3.0}};
    case Experiment::weights_diag:
      return {{"max_residual", std::nullopt, 1e-12}};
  }
  return {};
}

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  Section s(root, "");
  RunConfig c;
  c.experiment = parse_experiment(s.text("experiment"));
  const bool kw = c.experiment == Experiment::kalthoff;

  auto& d = c.discretization;
  d.order = positive_int(s, "order", kw ? 3 : 2);
  if (d.order > 4) throw ConfigError(s.path("order"), "reproduction order must be 1..4");
  d.ratio = positive(s, "ratio", s.number("ratio", d.order + 0.5));
  d.perturbation = s.number("perturbation", d.perturbation);
  if (!(d.perturbation >= 0.0 && d.perturbation < 0.5)) throw ConfigError(s.path("perturbation"), "must lie in [0, 0.5)");
  const long long seed = s.integer("seed", 1);
  if (seed < 0) throw ConfigError(s.path("seed"), "must be non-negative");
  d.seed = static_cast<std::uint64_t>(seed);
  d.ensemble = positive_int(s, "ensemble", 1);
  if (kw && d.ensemble != 1) throw ConfigError(s.path("ensemble"), "kalthoff runs a single realization");
  const std::string basis = s.text("basis", "componentwise");
  if (basis == "componentwise")
    d.basis = BasisKind::componentwise;
  else if (basis == "reduced")
    d.basis = BasisKind::reduced;
  else
    throw ConfigError(s.path("basis"), "expected componentwise or reduced");
  if (s.has("solver")) parse_solver(Section(s.at("solver"), s.path("solver")), d.solver);

  if (kw) {
    if (s.has("resolutions")) throw ConfigError(s.path("resolutions"), "kalthoff takes kalthoff.nx / kalthoff.ny");
  } else {
    const json& r = s.at("resolutions");
    if (!r.is_array() || r.empty()) throw ConfigError(s.path("resolutions"), "expected a non-empty array");
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string p = s.path("resolutions") + "[" + std::to_string(i) + "]";
      if (!r[i].is_number_integer() || r[i].get<long long>() < 4 || r[i].get<long long>() > 100000)
        throw ConfigError(p, "expected an integer lattice size >= 4");
      c.resolutions.push_back(r[i].get<int>());
    }
  }

  const std::string scale = s.text("scale", "desk");
  if (scale != "desk" && scale != "fine") throw ConfigError(s.path("scale"), "expected desk or fine");
  c.requires_full = scale == "fine";

  for (const char* sec : {"typeI", "kalthoff", "damage"}) {
    const bool allowed = (std::string_view(sec) == "typeI") ? c.experiment == Experiment::typeI : kw;
    if (s.has(sec) && !allowed)
      throw ConfigError(s.path(sec), "section does not apply to experiment " + std::string(to_string(c.experiment)));
  }
  if (s.has("typeI")) parse_typeI(Section(s.at("typeI"), s.path("typeI")), c.typeI);
  if (kw) {
    if (s.has("kalthoff")) parse_kalthoff(Section(s.at("kalthoff"), s.path("kalthoff")), c.kalthoff);
    if (s.has("damage")) parse_damage(Section(s.at("damage"), s.path("damage")), c.damage);
  }
  if (c.experiment == Experiment::typeI &&
      std::find(c.resolutions.begin(), c.resolutions.end(), c.typeI.profile_resolution) == c.resolutions.end())
    throw ConfigError(s.path("typeI") + ".profile_resolution", "must be one of the resolutions");

  c.acceptance = s.has("acceptance") ? parse_acceptance(s.at("acceptance"), s.path("acceptance")) : default_acceptance(c);
  c.output = s.text("output", "out/" + std::string(to_string(c.experiment)));
  s.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", "cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  // nlohmann::ordered_json keeps insertion order so files diff cleanly.
  nlohmann::ordered_json j;
  const auto& d = c.discretization;
  const bool kw = c.experiment == Experiment::kalthoff;
  j["experiment"] = to_string(c.experiment);
  j["order"] = d.order;
  j["ratio"] = d.ratio;
  j["perturbation"] = d.perturbation;
  j["seed"] = d.seed;
  j["ensemble"] = d.ensemble;
  j["basis"] = d.basis == BasisKind::componentwise ? "componentwise" : "reduced";
  j["solver"] = {{"kind", d.solver.kind == SolverKind::sparse_lu ? "sparse_lu" : "gmres"},
                 {"rel_tol", d.solver.rel_tol},
                 {"max_iter", d.solver.max_iter},
                 {"restart", d.solver.restart}};
  if (!kw) j["resolutions"] = c.resolutions;
  j["scale"] = c.requires_full ? "fine" : "desk";
  if (c.experiment == Experiment::typeI) {
    const auto& t = c.typeI;
    j["typeI"] = {{"sigma0", format_quantity(t.crack.sigma0, Dimension::pressure)},
                  {"half_length", format_quantity(t.crack.half_length, Dimension::length)},
                  {"bulk_modulus", format_quantity(t.crack.bulk_modulus, Dimension::pressure)},
                  {"poisson_ratio", t.crack.poisson_ratio},
                  {"box", format_quantity(t.box, Dimension::length)},
                  {"profile_resolution", t.profile_resolution},
                  {"tip_exclusion", t.tip_exclusion}};
  }
  if (kw) {
    const auto& k = c.kalthoff;
    j["kalthoff"] = {
        {"width", format_quantity(k.width, Dimension::length)},
        {"height", format_quantity(k.height, Dimension::length)},
        {"nx", k.nx},
        {"ny", k.ny},
        {"notch_offset", format_quantity(k.notch_offset, Dimension::length)},
        {"notch_length", format_quantity(k.notch_length, Dimension::length)},
        {"impact_speed", format_quantity(k.impact_speed, Dimension::velocity)},
        {"material",
         {{"bulk_modulus", format_quantity(k.material.bulk_modulus, Dimension::pressure)},
          {"poisson_ratio", k.material.poisson_ratio},
          {"density", format_quantity(k.material.density, Dimension::density)}}},
        {"dt", format_quantity(k.dt, Dimension::time)},
        {"steps", k.steps},
        {"strain", k.strain == StrainMeasure::deformed_length ? "deformed_length" : "relative_displacement"},
        {"angle_radius", k.angle_radius_h},
        {"damage_threshold", k.damage_threshold},
        {"snapshot_every", k.snapshot_every}};
    nlohmann::ordered_json dm;
    dm["model"] = damage_model_name(c.damage.model);
    switch (c.damage.model) {
      case DamageConfig::Model::none: break;
      case DamageConfig::Model::fixed: dm["critical_strain"] = c.damage.critical_strain; break;
      case DamageConfig::Model::scaled_horizon:
        dm["coefficient"] = c.damage.coefficient;
        dm["horizon_unit"] = format_quantity(c.damage.horizon_unit, Dimension::length);
        break;
      case DamageConfig::Model::fracture_energy:
        dm["fracture_energy"] = format_quantity(c.damage.fracture_energy, Dimension::energy_per_area);
        break;
    }
    j["damage"] = dm;
  }
  auto acc = nlohmann::ordered_json::array();
  for (const auto& a : c.acceptance) {
    nlohmann::ordered_json e;
    e["metric"] = a.metric;
    if (a.min) e["min"] = *a.min;
    if (a.max) e["max"] = *a.max;
    acc.push_back(e);
  }
  j["acceptance"] = acc;
  j["output"] = c.output.generic_string();
  return j.dump(2) + "\n";
}

}  // namespace pdq
