#include "pdquad/assembly.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unsupported/Eigen/IterativeSolvers>

#include "pdquad/format.hpp"
#include "pdquad/simd.hpp"

namespace pdq {

FloatingParticleError::FloatingParticleError(std::uint32_t p)
    : AssemblyError("particle " + std::to_string(p) + " has no intact bonds but carries a load"), particle(p) {}

namespace {

void set_identity_row(SparseMatrixR& a, Eigen::Index row) {
  double* v = a.valuePtr();
  const int* inner = a.innerIndexPtr();
  for (int e = a.outerIndexPtr()[row]; e < a.outerIndexPtr()[row + 1]; ++e) v[e] = inner[e] == row ? 1.0 : 0.0;
}

}  // namespace

void apply_dirichlet(GlobalSystem& sys, std::span<const std::uint32_t> particles, std::span<const Vec2> values,
                     DirichletPolicy policy) {
  if (particles.size() != values.size()) throw AssemblyError("Dirichlet index and value counts differ");
  for (std::size_t n = 0; n < particles.size(); ++n) {
    const std::uint32_t p = particles[n];
    if (p >= sys.particles()) throw AssemblyError("Dirichlet particle " + std::to_string(p) + " out of range");
    if (policy == DirichletPolicy::boundary_only && !sys.boundary[p])
      throw AssemblyError("Dirichlet condition on interior particle " + std::to_string(p));
    set_identity_row(sys.matrix, 2 * p);
    set_identity_row(sys.matrix, 2 * p + 1);
    sys.rhs(2 * p) = values[n].x;
    sys.rhs(2 * p + 1) = values[n].y;
    sys.dirichlet[p] = 1;
  }
}

SystemAssembler::SystemAssembler(const PointCloud& cloud, const QuadratureRule& rule)
    : rule_(&rule), particles_(cloud.size()), boundary_(cloud.size(), 1) {
  const auto centers = rule.centers();
  const auto offsets = rule.offsets();
  const auto nbr = rule.neighbors();
  for (const auto p : centers) {
    if (p >= particles_) throw AssemblyError("quadrature rule does not match the point cloud");
    boundary_[p] = 0;
  }

  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(particles_);
  Eigen::VectorXi row_nnz = Eigen::VectorXi::Constant(dim, 2);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const int cols = 2 * static_cast<int>(offsets[k + 1] - offsets[k] + 1);
    row_nnz(2 * centers[k]) = cols;
    row_nnz(2 * centers[k] + 1) = cols;
  }
  pattern_.resize(dim, dim);
  pattern_.reserve(row_nnz);

  bond_slot_.resize(nbr.size());
  self_slot_.resize(centers.size());
  std::vector<std::uint32_t> row_particles;
  for (std::uint32_t p = 0; p < particles_; ++p) {
    if (boundary_[p]) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) pattern_.insert(2 * p + a, 2 * p + b) = 0.0;
      continue;
    }
    const std::size_t k = static_cast<std::size_t>(cloud.interior_slot(p));
    row_particles.assign(nbr.begin() + offsets[k], nbr.begin() + offsets[k + 1]);
    row_particles.push_back(p);
    std::sort(row_particles.begin(), row_particles.end());
    for (int a = 0; a < 2; ++a)
      for (const auto q : row_particles)
        for (int b = 0; b < 2; ++b) pattern_.insert(2 * p + a, 2 * q + b) = 0.0;
    auto slot = [&](std::uint32_t q) {
      return static_cast<std::uint32_t>(std::lower_bound(row_particles.begin(), row_particles.end(), q) -
                                        row_particles.begin());
    };
    for (std::size_t e = offsets[k]; e < offsets[k + 1]; ++e) bond_slot_[e] = slot(nbr[e]);
    self_slot_[k] = slot(p);
  }
  pattern_.makeCompressed();
  for (std::uint32_t p = 0; p < particles_; ++p) {
    if (boundary_[p]) {
      set_identity_row(pattern_, 2 * p);
      set_identity_row(pattern_, 2 * p + 1);
    }
  }
}

GlobalSystem SystemAssembler::make_system() const {
  GlobalSystem sys;
  sys.matrix = pattern_;
  sys.rhs = Eigen::VectorXd::Zero(pattern_.rows());
  sys.boundary = boundary_;
  sys.dirichlet.assign(particles_, 0);
  return sys;
}

void SystemAssembler::fill(GlobalSystem& sys, std::span<const double> weights, double c, double mass,
                           const Execution& exec) const {
  const QuadratureRule& rule = *rule_;
  if (weights.size() != rule.weights().size()) throw AssemblyError("weight layout does not match the rule");
  if (sys.matrix.nonZeros() != pattern_.nonZeros()) throw AssemblyError("system was not built by this assembler");
  const auto centers = rule.centers();
  const auto offsets = rule.offsets();
  std::vector<std::uint8_t> is_floating(centers.size(), 0);
  double* values = sys.matrix.valuePtr();
  const int* outer = sys.matrix.outerIndexPtr();

  parallel_for(0, centers.size(), exec, [&](std::size_t k) {
    const std::size_t off = offsets[k];
    const std::size_t n = offsets[k + 1] - off;
    const std::uint32_t p = centers[k];
    const int r0 = outer[2 * p];
    const int r1 = outer[2 * p + 1];
    std::fill(values + r0, values + outer[2 * p + 2], 0.0);
    const bool any = std::any_of(weights.begin() + off, weights.begin() + off + n, [](double w) { return w != 0.0; });
    if (!any) {
      is_floating[k] = 1;
      values[r0 + 2 * self_slot_[k]] = 1.0;
      values[r1 + 2 * self_slot_[k] + 1] = 1.0;
      return;
    }
    thread_local std::vector<double> bxx, bxy, byy;
    bxx.resize(n);
    bxy.resize(n);
    byy.resize(n);
    simd::kernels().bond_blocks(rule.xi_x().data() + off, rule.xi_y().data() + off, weights.data() + off, n, c,
                                bxx.data(), bxy.data(), byy.data());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t s = 2 * bond_slot_[off + j];
      values[r0 + s] = -bxx[j];
      values[r0 + s + 1] = -bxy[j];
      values[r1 + s] = -bxy[j];
      values[r1 + s + 1] = -byy[j];
      sxx += bxx[j];
      sxy += bxy[j];
      syy += byy[j];
    }
    const std::uint32_t d = 2 * self_slot_[k];
    values[r0 + d] = mass + sxx;
    values[r0 + d + 1] = sxy;
    values[r1 + d] = sxy;
    values[r1 + d + 1] = mass + syy;
  });

  for (std::uint32_t p = 0; p < particles_; ++p) {
    if (boundary_[p]) {
      set_identity_row(sys.matrix, 2 * p);
      set_identity_row(sys.matrix, 2 * p + 1);
    }
  }
  sys.floating.clear();
  for (std::size_t k = 0; k < centers.size(); ++k)
    if (is_floating[k]) sys.floating.push_back(centers[k]);
  std::fill(sys.dirichlet.begin(), sys.dirichlet.end(), 0);
}

GlobalSystem assemble_static(const PointCloud& cloud, double c, const QuadratureRule& rule, const BondTable& bonds,
                             std::span<const Vec2> f, std::span<const Vec2> u_dirichlet, const Execution& exec) {
  if (f.size() != cloud.size() || u_dirichlet.size() != cloud.size())
    throw AssemblyError("forcing and Dirichlet fields must cover every particle");
  const SystemAssembler assembler(cloud, rule);
  GlobalSystem sys = assembler.make_system();
  std::vector<double> w;
  bonds.masked_weights(rule, w);
  assembler.fill(sys, w, c, 0.0, exec);
  for (const auto p : cloud.interior()) {
    sys.rhs(2 * p) = f[p].x;
    sys.rhs(2 * p + 1) = f[p].y;
  }
  for (const auto p : sys.floating) {
    if (f[p].x != 0.0 || f[p].y != 0.0) throw FloatingParticleError(p);
    sys.rhs(2 * p) = 0.0;
    sys.rhs(2 * p + 1) = 0.0;
  }
  const auto bnd = cloud.boundary();
  std::vector<Vec2> values(bnd.size());
  for (std::size_t n = 0; n < bnd.size(); ++n) values[n] = u_dirichlet[bnd[n]];
  apply_dirichlet(sys, bnd, values);
  return sys;
}

void spmv(const SparseMatrixR& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  if (!a.isCompressed()) throw AssemblyError("spmv needs a compressed matrix");
  y.resize(a.rows());
  const simd::CsrView view{a.rows(), a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr()};
  simd::kernels().spmv(view, x.data(), y.data());
}

struct LinearSolver::Impl {
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  const SparseMatrixR* a = nullptr;
  Eigen::VectorXd row_scale;  // 1 / max |a_ij| per row
  ColMatrix col;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  std::vector<int> analyzed_inner;
  std::vector<int> analyzed_outer;
  Eigen::GMRES<ColMatrix, Eigen::IncompleteLUT<double>> gmres;
};

LinearSolver::LinearSolver(SolverOptions options) : options_(options), impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

void LinearSolver::compute(const SparseMatrixR& a) {
  if (a.rows() != a.cols()) throw SolverError("matrix is not square", 0.0, 0);
  Impl& s = *impl_;
  s.a = &a;
  s.row_scale.resize(a.rows());
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double m = 0.0;
    for (SparseMatrixR::InnerIterator it(a, r); it; ++it) m = std::max(m, std::abs(it.value()));
    if (!(m > 0.0)) throw SolverError("matrix has an empty row", 0.0, 0);
    s.row_scale(r) = 1.0 / m;
  }
  s.col = s.row_scale.asDiagonal() * a;
  s.col.makeCompressed();
  if (options_.kind == SolverKind::sparse_lu) {
    const auto nnz = static_cast<std::size_t>(s.col.nonZeros());
    const bool same = s.analyzed_inner.size() == nnz &&
                      std::equal(s.analyzed_inner.begin(), s.analyzed_inner.end(), s.col.innerIndexPtr()) &&
                      s.analyzed_outer.size() == static_cast<std::size_t>(s.col.cols() + 1) &&
                      std::equal(s.analyzed_outer.begin(), s.analyzed_outer.end(), s.col.outerIndexPtr());
    if (!same) {
      s.lu.analyzePattern(s.col);
      s.analyzed_inner.assign(s.col.innerIndexPtr(), s.col.innerIndexPtr() + nnz);
      s.analyzed_outer.assign(s.col.outerIndexPtr(), s.col.outerIndexPtr() + s.col.cols() + 1);
    }
    s.lu.factorize(s.col);
    if (s.lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + s.lu.lastErrorMessage(), 0.0, 0);
  } else {
    s.gmres.set_restart(options_.restart);
    s.gmres.setMaxIterations(options_.max_iter);
    s.gmres.setTolerance(0.1 * options_.rel_tol);
    s.gmres.compute(s.col);
    if (s.gmres.info() != Eigen::Success) throw SolverError("ILU preconditioner setup failed", 0.0, 0);
  }
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b, SolveReport* report) {
  Impl& s = *impl_;
  if (!s.a) throw SolverError("solve called before compute", 0.0, 0);
  const Eigen::VectorXd sb = s.row_scale.cwiseProduct(b);
  const double bnorm = sb.norm();
  if (bnorm == 0.0) {
    if (report) *report = {};
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd u;
  Eigen::VectorXd r(b.size());
  int iterations = 0;
  auto residual = [&] {
    spmv(*s.a, u, r);
    r = sb - s.row_scale.cwiseProduct(r);
    return r.norm() / bnorm;
  };
  double rel = 0.0;
  if (options_.kind == SolverKind::sparse_lu) {
    u = s.lu.solve(sb);
    rel = residual();
    // A few steps of iterative refinement if pivoting growth cost accuracy.
    for (int it = 0; it < 3 && rel > options_.rel_tol; ++it) {
      u += s.lu.solve(r);
      rel = residual();
      ++iterations;
    }
  } else {
    u = s.gmres.solve(sb);
    iterations = static_cast<int>(s.gmres.iterations());
    rel = residual();
  }
  if (report) *report = {rel, iterations};
  if (!std::isfinite(rel) || rel > options_.rel_tol)
    throw SolverError("linear solve missed the residual target (relative residual " + fmt_double(rel) + ")", rel,
                      iterations);
  return u;
}

Eigen::VectorXd solve_linear(const GlobalSystem& sys, const SolverOptions& options, SolveReport* report) {
  LinearSolver solver(options);
  solver.compute(sys.matrix);
  return solver.solve(sys.rhs, report);
}

void write_triplets(std::ostream& os, const SparseMatrixR& a) {
  os << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (Eigen::Index r = 0; r < a.outerSize(); ++r)
    for (SparseMatrixR::InnerIterator it(a, r); it; ++it) os << r << ' ' << it.col() << ' ' << fmt_double(it.value()) << '\n';
}

Eigen::VectorXd pack(std::span<const Vec2> field) {
  Eigen::VectorXd v(2 * static_cast<Eigen::Index>(field.size()));
  for (std::size_t p = 0; p < field.size(); ++p) {
    v(2 * p) = field[p].x;
    v(2 * p + 1) = field[p].y;
  }
  return v;
}

std::vector<Vec2> unpack(const Eigen::VectorXd& v) {
  std::vector<Vec2> out(static_cast<std::size_t>(v.size() / 2));
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = {v(2 * p), v(2 * p + 1)};
  return out;
}

}  // namespace pdq
