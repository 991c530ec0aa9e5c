#include "pdquad/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace pdq {

namespace {

ManufacturedValue eval_case(ManufacturedCase which, Vec2 x, double delta) {
  return which == ManufacturedCase::nonlocal_poly ? eval_nonlocal_poly(x.x, x.y, delta) : eval_local_trig(x.x, x.y);
}

double case_bulk_modulus(ManufacturedCase which) {
  return which == ManufacturedCase::nonlocal_poly ? kPolyBulkModulus : 1.0;
}

std::vector<double> column_h(const std::vector<ConvergenceRow>& rows) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.h);
  return v;
}

ConvergenceFit fit_rows(const std::vector<ConvergenceRow>& rows, bool sup = false) {
  if (rows.size() < 2) return {};
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(sup ? r.sup : r.l2);
  const auto h = column_h(rows);
  return convergence_slope(h, e);
}

Eigen::VectorXd solve_static(const Discretization& d, double c, const BondTable& bonds, std::span<const Vec2> f,
                             std::span<const Vec2> ud, const DiscretizationOptions& opt) {
  const GlobalSystem sys = assemble_static(d.cloud, c, d.rule, bonds, f, ud, opt.exec);
  return solve_linear(sys, opt.solver);
}

}  // namespace

Discretization discretize(const Domain2D& domain, int nx, int ny, const DiscretizationOptions& opt) {
  Discretization d;
  const double M = opt.effective_ratio();
  d.cloud = build_perturbed_lattice(domain, {nx, ny, opt.perturbation, opt.seed}, M);
  // Weights do not depend on the bulk modulus beyond row scaling.
  const PeridynamicKernel kernel(1.0, d.cloud.horizon());
  QuadratureOptions q;
  q.order = opt.order;
  q.basis = opt.basis;
  q.exec = opt.exec;
  d.rule = generate_weights(d.cloud, kernel.descriptor(), q);
  return d;
}

Domain2D periodic_box(int n, double ratio) {
  const double pi = std::numbers::pi;
  Domain2D d{{-pi, -pi}, {pi, pi}};
  d.collar = ratio * 2.0 * pi / (n - 1);
  return d;
}

ConvergenceRow ensemble_mean(std::span<const ConvergenceRow> rows) {
  if (rows.empty()) throw std::invalid_argument("ensemble_mean: no rows");
  ConvergenceRow out = rows.front();
  double l2 = 0.0, sup = 0.0;
  for (const auto& r : rows) {
    l2 += std::log(r.l2);
    sup += std::log(r.sup);
  }
  const double m = static_cast<double>(rows.size());
  out.l2 = std::exp(l2 / m);
  out.sup = std::exp(sup / m);
  return out;
}

namespace {

template <class Body>
void for_each_member(const DiscretizationOptions& opt, Body&& body) {
  if (opt.ensemble < 1) throw std::invalid_argument("ensemble size must be at least 1");
  for (int e = 0; e < opt.ensemble; ++e) {
    DiscretizationOptions member = opt;
    member.seed = opt.seed + static_cast<std::uint64_t>(e);
    body(e, member);
  }
}

}  // namespace

ConvergenceResult run_convergence(ManufacturedCase which, std::span<const int> resolutions,
                                  const DiscretizationOptions& opt, bool truncation, bool solve) {
  ConvergenceResult out;
  for (const int n : resolutions) {
    std::vector<ConvergenceRow> trunc_rows, sol_rows;
    for_each_member(opt, [&](int, const DiscretizationOptions& mo) {
      const Discretization d = discretize(periodic_box(n, mo.effective_ratio()), n, n, mo);
      const PointCloud& cloud = d.cloud;
      const double delta = cloud.horizon();
      const double c = material_constant(case_bulk_modulus(which), delta, 2);
      std::vector<Vec2> u(cloud.size()), f(cloud.size());
      for (std::size_t p = 0; p < cloud.size(); ++p) {
        const auto v = eval_case(which, cloud.position(p), delta);
        u[p] = v.displacement;
        f[p] = v.forcing;
      }
      if (truncation) {
        const auto L = apply_operator_all(d.rule, c, u, mo.exec);
        std::vector<Vec2> exact(L.size());
        for (std::size_t k = 0; k < L.size(); ++k)
          exact[k] = eval_case(which, cloud.position(d.rule.centers()[k]), delta).operator_value;
        const auto e = error_norms(L, exact);
        trunc_rows.push_back({cloud.spacing(), delta, mo.order, e.l2, e.sup});
      }
      if (solve) {
        const BondTable bonds(d.rule, cloud.size());
        const auto uh = unpack(solve_static(d, c, bonds, f, u, mo));
        const auto e = error_norms(uh, u, cloud.interior());
        sol_rows.push_back({cloud.spacing(), delta, mo.order, e.l2, e.sup});
      }
    });
    if (truncation) out.truncation.push_back(ensemble_mean(trunc_rows));
    if (solve) out.solution.push_back(ensemble_mean(sol_rows));
  }
  out.truncation_fit = fit_rows(out.truncation);
  out.solution_fit = fit_rows(out.solution);
  return out;
}

PatchCrackResult run_patch_crack(std::span<const int> resolutions, const DiscretizationOptions& opt) {
  PatchCrackResult out;
  for (const int n : resolutions) {
    std::vector<ConvergenceRow> rows;
    for_each_member(opt, [&](int, const DiscretizationOptions& mo) {
      Domain2D dom = periodic_box(n, mo.effective_ratio());
      const double h = 2.0 * std::numbers::pi / (n - 1);
      const double reach = std::numbers::pi + dom.collar + h;
      dom.cracks = {{{0.0, -reach}, {0.0, reach}}};
      const Discretization d = discretize(dom, n, n, mo);
      const PointCloud& cloud = d.cloud;
      BondTable bonds(d.rule, cloud.size());
      preprocess_cracks(cloud, bonds, cloud.domain().cracks, cloud.domain().free_surfaces);
      const double c = material_constant(1.0, cloud.horizon(), 2);
      std::vector<Vec2> u(cloud.size()), f(cloud.size());
      for (std::size_t p = 0; p < cloud.size(); ++p)
        u[p] = eval_patch(cloud.position(p).x, cloud.position(p).y).displacement;
      const auto uh = unpack(solve_static(d, c, bonds, f, u, mo));
      const auto line = line_subset_y(cloud, 0.0, 0.75 * cloud.spacing());
      const auto e = error_norms(uh, u, line);
      rows.push_back({cloud.spacing(), cloud.horizon(), mo.order, e.l2, e.sup});
    });
    out.rows.push_back(ensemble_mean(rows));
  }
  out.l2_fit = fit_rows(out.rows);
  out.sup_fit = fit_rows(out.rows, true);
  return out;
}

TypeIResult run_typeI(std::span<const int> resolutions, const DiscretizationOptions& opt, const TypeIOptions& t) {
  TypeIResult out;
  const double a = t.crack.half_length;
  for (const int n : resolutions) {
    std::vector<ConvergenceRow> ry, rx;
    for_each_member(opt, [&](int member, const DiscretizationOptions& mo) {
      Domain2D dom{{-t.box, -t.box}, {t.box, t.box}};
      dom.cracks = {{{-a, 0.0}, {a, 0.0}}};
      const Discretization d = discretize(dom, n, n, mo);
      const PointCloud& cloud = d.cloud;
      BondTable bonds(d.rule, cloud.size());
      preprocess_cracks(cloud, bonds, cloud.domain().cracks, cloud.domain().free_surfaces);
      const double c = material_constant(t.crack.bulk_modulus, cloud.horizon(), 2);
      std::vector<Vec2> u(cloud.size()), f(cloud.size());
      for (std::size_t p = 0; p < cloud.size(); ++p) {
        const Vec2 x = cloud.position(p);
        u[p] = eval_typeI(x.x, x.y, t.crack, std::signbit(x.y) ? CrackFace::lower : CrackFace::upper);
      }
      const auto uh = unpack(solve_static(d, c, bonds, f, u, mo));
      const double band = 0.75 * cloud.spacing();
      const auto ly = line_subset_y(cloud, 0.0, band);
      const auto lx = line_subset_x(cloud, 0.0, band);
      const auto ey = error_norms(uh, u, ly);
      const auto ex = error_norms(uh, u, lx);
      ry.push_back({cloud.spacing(), cloud.horizon(), mo.order, ey.l2, ey.sup});
      rx.push_back({cloud.spacing(), cloud.horizon(), mo.order, ex.l2, ex.sup});

      if (n != t.profile_resolution || member != 0) return;
      const double cut = t.tip_exclusion * cloud.horizon();
      double scale = 0.0, worst = 0.0;
      std::vector<std::uint32_t> kept;
      for (const auto* line : {&ly, &lx}) {
        for (const auto p : *line) {
          const Vec2 x = cloud.position(p);
          if (std::hypot(x.x - a, x.y) <= cut || std::hypot(x.x + a, x.y) <= cut) continue;
          kept.push_back(p);
          scale = std::max(scale, norm(u[p]));
        }
      }
      for (const auto p : kept) {
        worst = std::max(worst, norm(uh[p] - u[p]));
        const Vec2 x = cloud.position(p);
        out.profile.push_back({x.x, x.y, uh[p].x, uh[p].y, u[p].x, u[p].y});
      }
      if (scale > 0.0) out.profile_deviation = worst / scale;
    });
    out.rows_y0.push_back(ensemble_mean(ry));
    out.rows_x0.push_back(ensemble_mean(rx));
  }
  out.fit_y0 = fit_rows(out.rows_y0);
  out.fit_x0 = fit_rows(out.rows_x0);
  return out;
}

double kalthoff_horizon(const KalthoffOptions& k, double ratio) {
  return ratio * std::max(k.width / (k.nx - 1), k.height / (k.ny - 1));
}

KalthoffResult run_kalthoff(const KalthoffOptions& k, const DiscretizationOptions& opt, const StepObserver& observer) {
  const double ratio = opt.effective_ratio();
  const double delta = kalthoff_horizon(k, ratio);
  const double h = delta / ratio;
  const double reach = delta + h;
  const double xc = 0.5 * k.width;

  Domain2D dom{{0.0, 0.0}, {k.width, k.height}};
  for (const double sx : {-1.0, 1.0}) {
    const double x = xc + sx * k.notch_offset;
    dom.cracks.push_back({{x, k.height - k.notch_length}, {x, k.height + reach}});
  }
  dom.free_surfaces = {{{0.0, -reach}, {0.0, k.height + reach}},
                       {{k.width, -reach}, {k.width, k.height + reach}},
                       {{-reach, 0.0}, {k.width + reach, 0.0}}};

  const Discretization d = discretize(dom, k.nx, k.ny, opt);
  const PointCloud& cloud = d.cloud;
  BondTable bonds(d.rule, cloud.size());
  KalthoffResult res;
  res.horizon = cloud.horizon();
  res.critical_strain = k.critical_strain;
  res.broken_preprocess = preprocess_cracks(cloud, bonds, dom.cracks, dom.free_surfaces);

  const double c = material_constant(k.material.bulk_modulus, cloud.horizon(), 2);
  DynamicsOptions dyn;
  dyn.density = k.material.density;
  dyn.dt = k.dt;
  dyn.critical_strain = k.critical_strain;
  dyn.strain = k.strain;
  dyn.solver = opt.solver;
  dyn.exec = opt.exec;
  auto dirichlet = [&](double t, std::span<const std::uint32_t> bnd, std::span<Vec2> out) {
    for (std::size_t n = 0; n < bnd.size(); ++n) {
      const Vec2 x = cloud.position(bnd[n]);
      const bool impact = x.y > k.height && std::abs(x.x - xc) < k.notch_offset;
      out[n] = impact ? Vec2{0.0, -k.impact_speed * t} : Vec2{};
    }
  };
  ImplicitIntegrator integrator(cloud, d.rule, c, dyn, dirichlet);
  SimulationState state = integrator.initial_state(std::move(bonds));

  for (int s = 0; s < k.steps; ++s) {
    const StepReport rep = integrator.step(state);
    res.broken_dynamic += rep.newly_broken;
    if (observer) observer(state, rep);
    if (k.snapshot_every > 0 && !k.snapshot_dir.empty() && state.step % k.snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%06lld.csv", static_cast<long long>(state.step));
      std::ofstream os(k.snapshot_dir / name);
      write_snapshot(os, cloud, state.u, state.bonds);
    }
  }
  res.steps = static_cast<int>(state.step);
  const double radius = k.angle_radius_h * h;
  const double tip_y = k.height - k.notch_length;
  res.left = measure_crack_angle(cloud, state.bonds, {xc - k.notch_offset, tip_y}, radius, k.damage_threshold);
  res.right = measure_crack_angle(cloud, state.bonds, {xc + k.notch_offset, tip_y}, radius, k.damage_threshold);
  res.fragments = fragment_count(cloud, state.bonds);
  return res;
}

}  // namespace pdq
