#include "pdquad/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "pdquad/format.hpp"
#include "pdquad/simd.hpp"

namespace pdq {

double bond_strain(Vec2 x_i, Vec2 x_j, Vec2 u_i, Vec2 u_j, StrainMeasure measure) {
  const Vec2 xi = x_j - x_i;
  const double r0 = norm(xi);
  if (!(r0 > 0.0)) throw GeometryError("bond strain between coincident reference positions");
  if (measure == StrainMeasure::relative_displacement) return norm(u_j - u_i) / r0;
  return (norm(xi + (u_j - u_i)) - r0) / r0;
}

std::size_t preprocess_cracks(const PointCloud& cloud, BondTable& bonds, std::span<const Segment> cracks,
                              std::span<const Segment> free_surfaces) {
  std::vector<Segment> segs(cracks.begin(), cracks.end());
  segs.insert(segs.end(), free_surfaces.begin(), free_surfaces.end());
  std::size_t count = 0;
  for (std::size_t b = 0; b < bonds.bond_count(); ++b) {
    if (bonds.broken(b)) continue;
    const auto [p, q] = bonds.endpoints(b);
    const Vec2 xp = cloud.position(p);
    const Vec2 xq = cloud.position(q);
    for (const Segment& s : segs) {
      if (std::max(xp.x, xq.x) < std::min(s.a.x, s.b.x) || std::min(xp.x, xq.x) > std::max(s.a.x, s.b.x) ||
          std::max(xp.y, xq.y) < std::min(s.a.y, s.b.y) || std::min(xp.y, xq.y) > std::max(s.a.y, s.b.y))
        continue;
      if (segment_intersects_bond(xp, xq, s)) {
        count += bonds.break_bond(b, 0) ? 1 : 0;
        break;
      }
    }
  }
  return count;
}

ImplicitIntegrator::ImplicitIntegrator(const PointCloud& cloud, const QuadratureRule& rule, double c,
                                       DynamicsOptions options, DirichletFn dirichlet, std::vector<Vec2> body_force)
    : cloud_(&cloud),
      rule_(&rule),
      c_(c),
      options_(options),
      dirichlet_(std::move(dirichlet)),
      body_force_(std::move(body_force)),
      assembler_(cloud, rule),
      system_(assembler_.make_system()),
      solver_(options.solver) {
  if (!(options_.density > 0.0) || !(options_.dt > 0.0)) throw AssemblyError("density and time step must be positive");
  if (!body_force_.empty() && body_force_.size() != cloud.size())
    throw AssemblyError("body force must cover every particle");
  if (!dirichlet_) throw AssemblyError("dynamics needs a Dirichlet data callback");
  boundary_values_.resize(cloud.boundary().size());
}

SimulationState ImplicitIntegrator::initial_state(BondTable bonds) const {
  SimulationState s;
  const std::size_t n = cloud_->size();
  s.u_prev.assign(n, Vec2{});
  s.u.assign(n, Vec2{});
  s.u_next.assign(n, Vec2{});
  s.dt = options_.dt;
  s.bonds = std::move(bonds);
  return s;
}

StepReport ImplicitIntegrator::step(SimulationState& state) {
  StepReport report;
  const PointCloud& cloud = *cloud_;
  const double mass = options_.density / (options_.dt * options_.dt);
  BondTable& bonds = state.bonds;

  if (bonds.broken_count() != factored_broken_) {
    bonds.masked_weights(*rule_, weights_);
    assembler_.fill(system_, weights_, c_, mass, options_.exec);
    solver_.compute(system_.matrix);
    factored_broken_ = bonds.broken_count();
    report.refactored = true;
  }

  Eigen::VectorXd& b = system_.rhs;
  for (const auto p : cloud.interior()) {
    Vec2 r = mass * (2.0 * state.u[p] - state.u_prev[p]);
    if (!body_force_.empty()) r += body_force_[p];
    b(2 * p) = r.x;
    b(2 * p + 1) = r.y;
  }
  for (const auto p : system_.floating) {
    b(2 * p) = state.u[p].x;
    b(2 * p + 1) = state.u[p].y;
  }
  report.floating = system_.floating.size();
  const double t_next = static_cast<double>(state.step + 1) * options_.dt;
  const auto bnd = cloud.boundary();
  dirichlet_(t_next, bnd, boundary_values_);
  for (std::size_t n = 0; n < bnd.size(); ++n) {
    b(2 * bnd[n]) = boundary_values_[n].x;
    b(2 * bnd[n] + 1) = boundary_values_[n].y;
  }

  SolveReport sr;
  const Eigen::VectorXd sol = solver_.solve(b, &sr);
  report.residual = sr.residual;
  state.u_next = unpack(sol);

  if (std::isfinite(options_.critical_strain)) {
    const std::size_t nb = bonds.bond_count();
    if (bond_xi_x_.size() != nb) {
      bond_xi_x_.resize(nb);
      bond_xi_y_.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const auto [p, q] = bonds.endpoints(k);
        const Vec2 xi = cloud.position(q) - cloud.position(p);
        bond_xi_x_[k] = xi.x;
        bond_xi_y_[k] = xi.y;
      }
    }
    du_x_.resize(nb);
    du_y_.resize(nb);
    strain_.resize(nb);
    parallel_for(0, nb, options_.exec, [&](std::size_t k) {
      const auto [p, q] = bonds.endpoints(k);
      const Vec2 du = state.u_next[q] - state.u_next[p];
      du_x_[k] = du.x;
      du_y_[k] = du.y;
    });
    if (options_.strain == StrainMeasure::deformed_length) {
      simd::kernels().bond_strains(bond_xi_x_.data(), bond_xi_y_.data(), du_x_.data(), du_y_.data(), nb,
                                   strain_.data());
    } else {
      for (std::size_t k = 0; k < nb; ++k)
        strain_[k] = std::hypot(du_x_[k], du_y_[k]) / std::hypot(bond_xi_x_[k], bond_xi_y_[k]);
    }
    const auto step_id = static_cast<std::int32_t>(state.step + 1);
    for (std::size_t k = 0; k < nb; ++k)
      if (strain_[k] > options_.critical_strain && bonds.break_bond(k, step_id)) ++report.newly_broken;
  }

  std::swap(state.u_prev, state.u);
  std::swap(state.u, state.u_next);
  ++state.step;
  state.t = static_cast<double>(state.step) * options_.dt;
  state.u_next = state.u;
  return report;
}

namespace {

struct DisjointSets {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> size;
  explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

std::size_t fragment_count(const PointCloud& cloud, const BondTable& bonds, std::size_t min_size) {
  DisjointSets sets(cloud.size());
  for (std::size_t b = 0; b < bonds.bond_count(); ++b) {
    if (bonds.broken(b)) continue;
    const auto [p, q] = bonds.endpoints(b);
    if (cloud.region(p) == Region::interior && cloud.region(q) == Region::interior) sets.unite(p, q);
  }
  std::size_t count = 0;
  for (const auto p : cloud.interior())
    if (sets.find(p) == p && sets.size[p] >= min_size) ++count;
  return count;
}

std::vector<double> damage_since(const BondTable& bonds, std::int32_t from_step) {
  std::vector<double> broken(bonds.particle_count(), 0.0);
  for (std::size_t b = 0; b < bonds.bond_count(); ++b) {
    if (!bonds.broken(b) || bonds.broken_at(b) < from_step) continue;
    const auto [p, q] = bonds.endpoints(b);
    broken[p] += 1.0;
    broken[q] += 1.0;
  }
  for (std::size_t p = 0; p < broken.size(); ++p)
    broken[p] = bonds.initial_bonds(p) ? broken[p] / bonds.initial_bonds(p) : 0.0;
  return broken;
}

CrackAngle measure_crack_angle(const PointCloud& cloud, const BondTable& bonds, Vec2 tip, double radius,
                               double threshold) {
  const std::vector<double> dmg = damage_since(bonds, 1);
  std::vector<Vec2> pts;
  for (const auto p : cloud.interior()) {
    const Vec2 x = cloud.position(p);
    if (norm(x - tip) <= radius && x.y <= tip.y && dmg[p] >= threshold) pts.push_back(x);
  }
  CrackAngle out;
  out.samples = pts.size();
  if (pts.size() < 2) return out;
  Vec2 mean;
  for (const Vec2 x : pts) mean += x;
  mean *= 1.0 / static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Vec2 x : pts) {
    const Vec2 d = x - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  // Principal axis of the scatter matrix.
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  Vec2 dir{std::cos(theta), std::sin(theta)};
  if (dot(dir, mean - tip) < 0.0) dir = -dir;
  out.direction = dir;
  out.degrees = std::acos(std::min(1.0, std::abs(dir.y))) * 180.0 / std::acos(-1.0);
  return out;
}

void write_snapshot(std::ostream& os, const PointCloud& cloud, std::span<const Vec2> u, const BondTable& bonds) {
  os << "id,x,y,ux,uy,damage\n";
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    const Vec2 x = cloud.position(p);
    os << p << ',' << fmt_double(x.x) << ',' << fmt_double(x.y) << ',' << fmt_double(u[p].x) << ','
       << fmt_double(u[p].y) << ',' << fmt_double(bonds.damage(p)) << '\n';
  }
}

}  // namespace pdq
