#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "pdquad/experiments.hpp"
#include "pdquad/quadrature.hpp"

using namespace pdq;
using boost::math::quadrature::gauss;
using std::numbers::pi;

namespace {

// Polar integral over the ball of radius delta, angle split in quarters.
template <class F>
double ball_integral(F f, double delta) {
  double total = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double a = q * pi / 2.0, b = a + pi / 2.0;
    total += gauss<double, 30>::integrate(
        [&](double t) {
          const Vec2 dir{std::cos(t), std::sin(t)};
          return gauss<double, 20>::integrate([&](double r) { return r * f(r * dir); }, 0.0, delta);
        },
        a, b);
  }
  return total;
}

}  // namespace

TEST_CASE("angular moments against numeric integration") {
  for (int p = 0; p <= 8; ++p)
    for (int q = 0; q <= 8; ++q) {
      const double want = gauss<double, 40>::integrate(
          [&](double t) { return std::pow(std::cos(t), p) * std::pow(std::sin(t), q); }, 0.0, 2.0 * pi);
      CHECK(angular_moment(p, q) == doctest::Approx(want).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("gauss-legendre integrates degree 2m-1 exactly") {
  for (const int m : {1, 4, 11, 24}) {
    std::vector<double> x, w;
    gauss_legendre(m, x, w);
    REQUIRE(x.size() == static_cast<std::size_t>(m));
    for (int d = 0; d <= 2 * m - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += w[i] * std::pow(x[i], d);
      const double want = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(s == doctest::Approx(want).epsilon(1e-14).scale(1.0));
    }
  }
}

TEST_CASE("basis sizes") {
  const KernelDescriptor k = PeridynamicKernel(1.0, 0.3).descriptor();
  // Reduced: constant plus monomials of degree 2..n+2.
  for (int n = 1; n <= 4; ++n) {
    std::size_t want = 1;
    for (int d = 2; d <= n + 2; ++d) want += d + 1;
    CHECK(build_basis(k, n, {}, BasisKind::reduced).size() == want);
    // Componentwise: constant plus 3 components times (n+1)(n+2)/2 multi-indices.
    CHECK(build_basis(k, n, {}, BasisKind::componentwise).size() == 1 + 3 * (n + 1) * (n + 2) / 2);
  }
}

TEST_CASE("closed-form moments match the polar oracle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(0.05, 3.0), c(-5.0, 5.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double delta = d(rng);
    const Vec2 center{c(rng), c(rng)};
    const KernelDescriptor k = PeridynamicKernel(1.7, delta).descriptor();
    for (const BasisKind kind : {BasisKind::componentwise, BasisKind::reduced}) {
      const ReproducingSpace s = build_basis(k, 1 + trial % 4, center, kind);
      const std::vector<double> g = s.exact_moments();
      for (std::size_t e = 0; e < s.size(); ++e) {
        const double want = ball_integral([&](Vec2 xi) { return s.evaluate(e, xi); }, delta);
        const double mag = ball_integral([&](Vec2 xi) { return std::abs(s.evaluate(e, xi)); }, delta);
        INFO("entry " << e << " delta " << delta);
        CHECK(std::abs(g[e] - want) <= 1e-10 * mag);
      }
    }
  }
}

TEST_CASE("non power-law profile uses the checked radial fallback") {
  KernelDescriptor k = PeridynamicKernel(1.0, 0.8).descriptor();
  k.custom_profile = [](double r) { return std::exp(-r) / (r * r * r); };
  const ReproducingSpace s = build_basis(k, 2, {}, BasisKind::reduced);
  const std::vector<double> g = s.exact_moments();
  for (std::size_t e = 0; e < s.size(); ++e) {
    const double want = ball_integral([&](Vec2 xi) { return s.evaluate(e, xi); }, 0.8);
    const double mag = ball_integral([&](Vec2 xi) { return std::abs(s.evaluate(e, xi)); }, 0.8);
    CHECK(std::abs(g[e] - want) <= 1e-10 * mag);
  }

  // A profile with a kink inside the ball defeats the fallback check.
  k.custom_profile = [](double r) { return (r < 0.31 ? 1.0 : 5.0) / (r * r * r); };
  CHECK_THROWS_AS(build_basis(k, 2, {}, BasisKind::reduced).exact_moments(), AccuracyError);
}

TEST_CASE("generated weights reproduce the ball moments") {
  for (const int n : {2, 3, 4}) {
    DiscretizationOptions opt;
    opt.order = n;
    const Domain2D box = periodic_box(24, opt.effective_ratio());
    const Discretization disc = discretize(box, 24, 24, opt);
    const QuadratureRule& rule = disc.rule;
    CHECK(rule.valid());
    CHECK(rule.max_residual() <= 1e-12);

    const double delta = disc.cloud.horizon();
    const KernelDescriptor k = PeridynamicKernel(1.0, delta).descriptor();
    for (std::size_t i = 0; i < rule.interior_count(); i += 37) {
      const ReproducingSpace s = build_basis(k, n, disc.cloud.position(rule.centers()[i]));
      const std::vector<double> g = s.exact_moments();
      const auto w = rule.weights(i);
      const std::size_t off = rule.offsets()[i];
      for (std::size_t e = 0; e < s.size(); ++e) {
        double sum = 0.0, mag = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
          const double f = s.evaluate(e, {rule.xi_x()[off + j], rule.xi_y()[off + j]});
          sum += w[j] * f;
          mag += std::abs(w[j] * f);
        }
        CHECK(std::abs(sum - g[e]) <= 1e-11 * std::max(mag, std::abs(g[e])));
      }
    }
  }
}

TEST_CASE("affine fields are in the null space of the discrete operator") {
  DiscretizationOptions opt;
  opt.order = 3;
  const Domain2D box = periodic_box(20, opt.effective_ratio());
  const Discretization disc = discretize(box, 20, 20, opt);
  const double delta = disc.cloud.horizon();
  const double c = material_constant(1.0, delta, 2);
  std::vector<Vec2> u(disc.cloud.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    const Vec2 x = disc.cloud.position(p);
    u[p] = {0.3 + 1.1 * x.x - 0.7 * x.y, -2.0 + 0.4 * x.x + 0.9 * x.y};
  }
  double scale = 0.0;
  for (const Vec2 v : u) scale = std::max(scale, norm(v));
  const std::vector<Vec2> lu = apply_operator_all(disc.rule, c, u);
  for (const Vec2 v : lu) CHECK(norm(v) <= 1e-10 * scale * c / delta);

  // A quadratic field is not annihilated.
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = {disc.cloud.position(p).x * disc.cloud.position(p).x, 0.0};
  const std::vector<Vec2> lq = apply_operator_all(disc.rule, c, u);
  CHECK(norm(lq[lq.size() / 2]) > 1e-3);
}

TEST_CASE("reduced and componentwise bases give valid rules") {
  DiscretizationOptions opt;
  opt.order = 2;
  opt.basis = BasisKind::reduced;
  const Domain2D box = periodic_box(16, opt.effective_ratio());
  CHECK(discretize(box, 16, 16, opt).rule.valid());
}

TEST_CASE("strict mode reports a failing stencil") {
  // Too few neighbors for the quartic space.
  const Domain2D box = periodic_box(16, 1.2);
  DiscretizationOptions opt;
  opt.order = 4;
  opt.ratio = 1.2;
  CHECK_THROWS_AS(discretize(box, 16, 16, opt), UnisolvencyError);
}
