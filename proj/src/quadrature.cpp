#include "pdquad/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "pdquad/format.hpp"
#include "pdquad/linalg.hpp"
#include "pdquad/simd.hpp"

namespace pdq {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double double_factorial(int k) {
  double f = 1.0;
  for (int i = k; i > 1; i -= 2) f *= i;
  return f;
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

UnisolvencyError::UnisolvencyError(std::uint32_t p, std::size_t n, double r)
    : std::runtime_error("quadrature constraints not satisfied at particle " + std::to_string(p) + " (stencil size " +
                         std::to_string(n) + ", relative residual " + fmt_double(r) + ")"),
      particle(p),
      stencil_size(n),
      residual(r) {}

double angular_moment(int p, int q) {
  if (p < 0 || q < 0) throw std::invalid_argument("angular_moment needs non-negative powers");
  if (p % 2 != 0 || q % 2 != 0) return 0.0;
  return 2.0 * std::numbers::pi * double_factorial(p - 1) * double_factorial(q - 1) / double_factorial(p + q);
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  // Golub-Welsch: eigenpairs of the symmetric Jacobi matrix.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(order);
  weights.resize(order);
  for (int k = 0; k < order; ++k) {
    nodes[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    weights[k] = 2.0 * v * v;
  }
}

ReproducingSpace::ReproducingSpace(KernelDescriptor kernel, int order, Vec2 center, BasisKind kind)
    : kernel_(std::move(kernel)), order_(order), center_(center), kind_(kind) {
  if (order < 1) throw std::invalid_argument("reproduction order must be at least 1");
  if (!(kernel_.horizon > 0.0)) throw KernelError("kernel horizon must be positive");
  if (kernel_.components.empty()) throw KernelError("kernel has no components");
  const double delta = kernel_.horizon;

  entries_.push_back({.constant = true});
  if (kind_ == BasisKind::componentwise) {
    for (int ci = 0; ci < static_cast<int>(kernel_.components.size()); ++ci) {
      const auto& comp = kernel_.components[ci];
      for (int deg = 0; deg <= order; ++deg) {
        for (int g1 = deg; g1 >= 0; --g1) {
          const int g2 = deg - g1;
          BasisEntry e;
          e.component = ci;
          e.gamma = {g1, g2};
          e.power = {comp.numerator[0] + g1, comp.numerator[1] + g2};
          e.coefficient = 1.0 / (ipow(delta, deg) * factorial(g1) * factorial(g2));
          entries_.push_back(e);
        }
      }
    }
  } else {
    const int lo = kernel_.numerator_degree;
    for (int deg = lo; deg <= order + lo; ++deg) {
      for (int b1 = deg; b1 >= 0; --b1) {
        BasisEntry e;
        e.power = {b1, deg - b1};
        e.coefficient = 1.0 / ipow(delta, deg - lo);
        entries_.push_back(e);
      }
    }
  }
}

double ReproducingSpace::evaluate(std::size_t e, Vec2 xi) const {
  const BasisEntry& b = entries_.at(e);
  if (b.constant) return 1.0;
  const double r = norm(xi);
  if (!(r > 0.0)) throw KernelError("kernel basis evaluated at zero separation");
  return kernel_.profile(r) * b.coefficient * ipow(xi.x, b.power[0]) * ipow(xi.y, b.power[1]);
}

double ReproducingSpace::row_scale(std::size_t e) const {
  if (entries_.at(e).constant) return 1.0;
  const double delta = kernel_.horizon;
  const double mag = std::abs(kernel_.profile(delta)) * ipow(delta, kernel_.numerator_degree);
  return mag > 0.0 && std::isfinite(mag) ? 1.0 / mag : 1.0;
}

std::vector<double> ReproducingSpace::exact_moments(int fallback_order, double fallback_tol) const {
  const double delta = kernel_.horizon;
  std::vector<double> g(entries_.size(), 0.0);

  std::vector<double> x1, w1, x2, w2;
  if (!kernel_.power_law()) {
    gauss_legendre(fallback_order, x1, w1);
    gauss_legendre(2 * fallback_order, x2, w2);
  }
  auto radial_numeric = [&](int m, const std::vector<double>& x, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) {
      const double r = 0.5 * delta * (x[q] + 1.0);
      s += w[q] * kernel_.profile(r) * ipow(r, m + 1);
    }
    return 0.5 * delta * s;
  };

  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const BasisEntry& b = entries_[e];
    if (b.constant) {
      g[e] = std::numbers::pi * delta * delta;
      continue;
    }
    const double ang = angular_moment(b.power[0], b.power[1]);
    if (ang == 0.0) continue;
    const int m = b.power[0] + b.power[1];
    double radial = 0.0;
    if (kernel_.power_law()) {
      const double expo = m + 2 - kernel_.radial_power;
      if (!(expo > 0.0)) throw KernelError("ball moment diverges for this kernel entry");
      radial = kernel_.scale * std::pow(delta, expo) / expo;
    } else {
      const double coarse = radial_numeric(m, x1, w1);
      radial = radial_numeric(m, x2, w2);
      if (!(std::abs(radial - coarse) <= fallback_tol * std::abs(radial)))
        throw AccuracyError("numeric radial moment not converged at order " + std::to_string(fallback_order));
    }
    g[e] = b.coefficient * ang * radial;
  }
  return g;
}

ReproducingSpace build_basis(const KernelDescriptor& kernel, int order, Vec2 center, BasisKind kind) {
  return ReproducingSpace(kernel, order, center, kind);
}

bool QuadratureRule::valid() const {
  return std::all_of(diagnostics_.begin(), diagnostics_.end(),
                     [&](const StencilDiagnostics& d) { return d.residual <= residual_tol_; });
}

double QuadratureRule::max_residual() const {
  double m = 0.0;
  for (const auto& d : diagnostics_) m = std::max(m, d.residual);
  return m;
}

void QuadratureRule::write_diagnostics_csv(std::ostream& os) const {
  os << "i,stencil_size,residual,rank,cond_estimate\n";
  for (std::size_t k = 0; k < diagnostics_.size(); ++k) {
    const auto& d = diagnostics_[k];
    os << centers_[k] << ',' << (offsets_[k + 1] - offsets_[k]) << ',' << fmt_double(d.residual) << ',' << d.rank
       << ',' << fmt_double(d.condition) << '\n';
  }
}

QuadratureRule generate_weights(const PointCloud& cloud, const KernelDescriptor& kernel,
                                const QuadratureOptions& options) {
  const double delta = kernel.horizon;
  if (std::abs(delta - cloud.horizon()) > 1e-12 * cloud.horizon())
    throw KernelError("kernel horizon differs from the point-cloud horizon");

  // Moments are translation invariant, so one space serves every stencil.
  const ReproducingSpace space(kernel, options.order, {0.0, 0.0}, options.basis);
  const std::size_t nb = space.size();
  const std::vector<double> g = space.exact_moments();
  std::vector<double> scale(nb);
  std::vector<double> g_hat(nb);
  for (std::size_t e = 0; e < nb; ++e) {
    scale[e] = space.row_scale(e);
    g_hat[e] = scale[e] * g[e] / (delta * delta);
  }
  double g_norm = 0.0;
  for (const double v : g_hat) g_norm = std::max(g_norm, std::abs(v));

  QuadratureRule rule;
  rule.order_ = options.order;
  rule.residual_tol_ = options.residual_tol;
  rule.centers_.assign(cloud.interior().begin(), cloud.interior().end());
  rule.offsets_.assign(cloud.stencil_offsets().begin(), cloud.stencil_offsets().end());
  rule.neighbors_.assign(cloud.stencil_indices().begin(), cloud.stencil_indices().end());
  const std::size_t nbonds = rule.neighbors_.size();
  rule.weights_.assign(nbonds, 0.0);
  rule.xi_x_.resize(nbonds);
  rule.xi_y_.resize(nbonds);
  rule.diagnostics_.resize(rule.centers_.size());

  parallel_for(0, rule.centers_.size(), options.exec, [&](std::size_t k) {
    const Vec2 xc = cloud.position(rule.centers_[k]);
    const std::size_t off = rule.offsets_[k];
    const std::size_t n = rule.offsets_[k + 1] - off;
    StencilDiagnostics& diag = rule.diagnostics_[k];
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 xi = cloud.position(rule.neighbors_[off + j]) - xc;
      rule.xi_x_[off + j] = xi.x;
      rule.xi_y_[off + j] = xi.y;
    }
    if (n == 0) {
      diag.residual = std::numeric_limits<double>::infinity();
      return;
    }
    DenseMatrix B(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(n));
    auto& m = B.raw();
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 xi{rule.xi_x_[off + j], rule.xi_y_[off + j]};
      for (std::size_t e = 0; e < nb; ++e) m(e, j) = scale[e] * space.evaluate(e, xi);
    }
    B.check_finite();
    try {
      const MinNormSolution sol = min_norm_solve(B, g_hat, options.rank_tol);
      const std::span<const double> w(sol.weights.data(), n);
      diag.residual = residual_inf_norm(B, w, g_hat) / g_norm;
      diag.rank = sol.rank;
      diag.condition = sol.condition;
      for (std::size_t j = 0; j < n; ++j) rule.weights_[off + j] = delta * delta * sol.weights(j);
    } catch (const InfeasibleSystem&) {
      diag.residual = std::numeric_limits<double>::infinity();
    }
  });

  if (options.strict) {
    for (std::size_t k = 0; k < rule.diagnostics_.size(); ++k) {
      const double r = rule.diagnostics_[k].residual;
      if (!(r <= options.residual_tol))
        throw UnisolvencyError(rule.centers_[k], rule.offsets_[k + 1] - rule.offsets_[k], r);
    }
  }
  return rule;
}

Vec2 apply_operator(const QuadratureRule& rule, std::span<const double> weights, double c,
                    std::span<const Vec2> u, std::size_t k) {
  const std::size_t off = rule.offsets()[k];
  const std::size_t n = rule.offsets()[k + 1] - off;
  thread_local std::vector<double> dux, duy;
  dux.resize(n);
  duy.resize(n);
  const Vec2 ui = u[rule.centers()[k]];
  const auto nbr = rule.neighbors();
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 d = u[nbr[off + j]] - ui;
    dux[j] = d.x;
    duy[j] = d.y;
  }
  const simd::BondBatch batch{rule.xi_x().data() + off, rule.xi_y().data() + off, dux.data(), duy.data(),
                              weights.data() + off, n};
  Vec2 out;
  simd::kernels().bond_force_sum(batch, c, &out.x, &out.y);
  return out;
}

Vec2 apply_operator(const QuadratureRule& rule, double c, std::span<const Vec2> u, std::size_t k) {
  return apply_operator(rule, rule.weights(), c, u, k);
}

std::vector<Vec2> apply_operator_all(const QuadratureRule& rule, double c, std::span<const Vec2> u,
                                     const Execution& exec) {
  std::vector<Vec2> out(rule.interior_count());
  parallel_for(0, out.size(), exec, [&](std::size_t k) { out[k] = apply_operator(rule, c, u, k); });
  return out;
}

}  // namespace pdq
