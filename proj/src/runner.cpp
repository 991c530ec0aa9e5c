#include "pdquad/runner.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pdquad/format.hpp"

namespace pdq {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void log(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

void write_rows(const fs::path& file, std::span<const ConvergenceRow> rows) {
  auto os = open_out(file);
  write_convergence_csv(os, rows);
}

double slope_of(const fs::path& file, std::string_view column) {
  const CsvTable t = read_csv(file);
  const auto h = t.numbers("h");
  const auto e = t.numbers(column);
  if (h.size() < 2) return kNaN;
  const auto fit = convergence_slope(h, e);
  return fit.exact ? kNaN : fit.slope;
}

std::vector<int> ordered(std::vector<int> r) {
  std::sort(r.begin(), r.end());
  return r;
}

void run_weights_diag(const RunConfig& c, const fs::path& dir, const RunContext& ctx) {
  const auto& d = c.discretization;
  for (const int n : c.resolutions) {
    const PointCloud cloud = build_perturbed_lattice(periodic_box(n, d.ratio), {n, n, d.perturbation, d.seed}, d.ratio);
    const PeridynamicKernel kernel(1.0, cloud.horizon());
    QuadratureOptions q;
    q.order = d.order;
    q.basis = d.basis;
    q.strict = false;
    q.exec = ctx.exec;
    const QuadratureRule rule = generate_weights(cloud, kernel.descriptor(), q);
    auto os = open_out(dir / ("weights_" + std::to_string(n) + ".csv"));
    rule.write_diagnostics_csv(os);
    log(ctx, "  weights " + std::to_string(n) + "^2: max residual " + fmt_double(rule.max_residual()));
  }
}

void run_kalthoff_case(const RunConfig& c, const fs::path& dir, const RunContext& ctx) {
  KalthoffOptions k = c.kalthoff;
  DiscretizationOptions opt = c.discretization;
  opt.exec = ctx.exec;
  const double delta = kalthoff_horizon(k, opt.ratio);
  k.critical_strain = c.damage.resolve(k.material, delta);
  if (k.snapshot_every > 0) {
    k.snapshot_dir = dir / "snapshots";
    fs::create_directories(k.snapshot_dir);
  }
  log(ctx, "  horizon " + fmt_double(delta) + " m, critical strain " + fmt_double(k.critical_strain));
  const KalthoffResult r = run_kalthoff(k, opt, [&](const SimulationState& s, const StepReport& rep) {
    if (rep.newly_broken > 0 || s.step % 10 == 0)
      log(ctx, "  step " + std::to_string(s.step) + ": " + std::to_string(rep.newly_broken) + " bonds broken, " +
                   std::to_string(s.bonds.broken_count()) + " total");
  });
  auto os = open_out(dir / "kalthoff.csv");
  os << "quantity,value\n";
  os << "horizon," << fmt_double(r.horizon) << '\n';
  os << "critical_strain," << fmt_double(r.critical_strain) << '\n';
  os << "steps," << r.steps << '\n';
  os << "broken_preprocess," << r.broken_preprocess << '\n';
  os << "broken_dynamic," << r.broken_dynamic << '\n';
  os << "left_angle," << fmt_double(r.left.degrees) << '\n';
  os << "left_samples," << r.left.samples << '\n';
  os << "right_angle," << fmt_double(r.right.degrees) << '\n';
  os << "right_samples," << r.right.samples << '\n';
  os << "fragments," << r.fragments << '\n';
}

void write_summary(const RunConfig& c, const RunOutcome& o, const fs::path& dir) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(c.experiment);
  j["verdict"] = o.pass ? "PASS" : "FAIL";
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : o.metrics) m[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
  j["metrics"] = m;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& r : o.checks) {
    nlohmann::ordered_json e;
    e["metric"] = r.check.metric;
    e["value"] = std::isfinite(r.value) ? nlohmann::ordered_json(r.value) : nlohmann::ordered_json();
    if (r.check.min) e["min"] = *r.check.min;
    if (r.check.max) e["max"] = *r.check.max;
    e["pass"] = r.pass;
    checks.push_back(e);
  }
  j["checks"] = checks;
  auto os = open_out(dir / "summary.json");
  os << j.dump(2) << '\n';
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error("CSV has no column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (c >= r.size()) throw std::runtime_error("short CSV row");
    double v = 0.0;
    const auto& s = r[c];
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("non-numeric CSV cell '" + s + "'");
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + file.string());
  t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

std::map<std::string, double> metrics_from_files(const RunConfig& c, const fs::path& dir) {
  std::map<std::string, double> m;
  switch (c.experiment) {
    case Experiment::converge_nonlocal:
    case Experiment::converge_local:
      m["truncation_slope"] = slope_of(dir / "truncation.csv", "l2");
      m["truncation_sup_slope"] = slope_of(dir / "truncation.csv", "sup");
      m["solution_slope"] = slope_of(dir / "solution.csv", "l2");
      m["solution_sup_slope"] = slope_of(dir / "solution.csv", "sup");
      break;
    case Experiment::patch_crack:
      m["l2_slope"] = slope_of(dir / "patch.csv", "l2");
      m["sup_slope"] = slope_of(dir / "patch.csv", "sup");
      break;
    case Experiment::typeI: {
      m["slope_y0"] = slope_of(dir / "line_y0.csv", "l2");
      m["slope_x0"] = slope_of(dir / "line_x0.csv", "l2");
      const CsvTable p = read_csv(dir / "profile.csv");
      const auto uhx = p.numbers("uh_x"), uhy = p.numbers("uh_y"), ux = p.numbers("u_x"), uy = p.numbers("u_y");
      double worst = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < ux.size(); ++i) {
        worst = std::max(worst, std::hypot(uhx[i] - ux[i], uhy[i] - uy[i]));
        scale = std::max(scale, std::hypot(ux[i], uy[i]));
      }
      m["profile_deviation"] = scale > 0.0 ? worst / scale : kNaN;
      break;
    }
    case Experiment::kalthoff: {
      const CsvTable t = read_csv(dir / "kalthoff.csv");
      const auto values = t.numbers("value");
      for (std::size_t i = 0; i < t.rows.size(); ++i) m[t.rows[i][0]] = values[i];
      break;
    }
    case Experiment::weights_diag: {
      double worst = 0.0;
      double min_rank = std::numeric_limits<double>::infinity();
      for (const int n : c.resolutions) {
        const CsvTable t = read_csv(dir / ("weights_" + std::to_string(n) + ".csv"));
        for (const double r : t.numbers("residual")) worst = std::isnan(r) ? r : std::max(worst, r);
        for (const double r : t.numbers("rank")) min_rank = std::min(min_rank, r);
      }
      m["max_residual"] = worst;
      m["min_rank"] = min_rank;
      break;
    }
  }
  return m;
}

std::vector<CheckResult> evaluate(std::span<const AcceptanceCheck> checks, const std::map<std::string, double>& metrics) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    CheckResult r{c, kNaN, false};
    if (const auto it = metrics.find(c.metric); it != metrics.end()) r.value = it->second;
    r.pass = std::isfinite(r.value) && (!c.min || r.value >= *c.min) && (!c.max || r.value <= *c.max);
    out.push_back(r);
  }
  return out;
}

std::string verdict_line(const RunConfig& c, const RunOutcome& o) {
  std::ostringstream os;
  if (o.skipped) {
    os << "SKIP " << to_string(c.experiment) << ": fine-scale config, rerun with --full";
    return os.str();
  }
  os << (o.pass ? "PASS " : "FAIL ") << to_string(c.experiment) << ':';
  for (std::size_t i = 0; i < o.checks.size(); ++i) {
    const auto& r = o.checks[i];
    os << (i ? "; " : " ") << r.check.metric << '=' << (std::isfinite(r.value) ? fmt_double(r.value) : "nan") << " in ["
       << (r.check.min ? fmt_double(*r.check.min) : "-inf") << ", " << (r.check.max ? fmt_double(*r.check.max) : "inf")
       << ']';
  }
  return os.str();
}

RunOutcome run_experiment(const RunConfig& c, const RunContext& ctx) {
  RunOutcome o;
  o.directory = ctx.out.empty() ? c.output : ctx.out;
  if (c.requires_full && !ctx.full) {
    o.skipped = true;
    return o;
  }
  const fs::path& dir = o.directory;
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "config.json");
    os << serialize_config(c);
  }
  DiscretizationOptions opt = c.discretization;
  opt.exec = ctx.exec;
  const auto res = ordered(c.resolutions);
  log(ctx, std::string(to_string(c.experiment)) + " -> " + dir.string());

  switch (c.experiment) {
    case Experiment::converge_nonlocal:
    case Experiment::converge_local: {
      const auto which = c.experiment == Experiment::converge_nonlocal ? ManufacturedCase::nonlocal_poly
                                                                        : ManufacturedCase::local_trig;
      const auto r = run_convergence(which, res, opt);
      write_rows(dir / "truncation.csv", r.truncation);
      write_rows(dir / "solution.csv", r.solution);
      break;
    }
    case Experiment::patch_crack: {
      const auto r = run_patch_crack(res, opt);
      write_rows(dir / "patch.csv", r.rows);
      break;
    }
    case Experiment::typeI: {
      const auto r = run_typeI(res, opt, c.typeI);
      write_rows(dir / "line_y0.csv", r.rows_y0);
      write_rows(dir / "line_x0.csv", r.rows_x0);
      auto os = open_out(dir / "profile.csv");
      os << "x,y,uh_x,uh_y,u_x,u_y\n";
      for (const auto& p : r.profile) {
        for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << fmt_double(p[i]);
        os << '\n';
      }
      break;
    }
    case Experiment::kalthoff: run_kalthoff_case(c, dir, ctx); break;
    case Experiment::weights_diag: run_weights_diag(c, dir, ctx); break;
  }

  o.metrics = metrics_from_files(c, dir);
  o.checks = evaluate(c.acceptance, o.metrics);
  o.pass = !o.checks.empty() && std::all_of(o.checks.begin(), o.checks.end(), [](const auto& r) { return r.pass; });
  write_summary(c, o, dir);
  return o;
}

RunOutcome recheck(const fs::path& dir) {
  const RunConfig c = load_config(dir / "config.json");
  RunOutcome o;
  o.directory = dir;
  o.metrics = metrics_from_files(c, dir);
  o.checks = evaluate(c.acceptance, o.metrics);
  o.pass = !o.checks.empty() && std::all_of(o.checks.begin(), o.checks.end(), [](const auto& r) { return r.pass; });
  return o;
}

}  // namespace pdq
