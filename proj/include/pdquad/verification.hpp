#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdquad/geometry.hpp"

namespace pdq {

/// Displacement, operator value L[u] (positive bond-sum convention), and the
/// static load f = -L[u].
struct ManufacturedValue {
  Vec2 displacement;
  Vec2 operator_value;
  Vec2 forcing;
};

/// u = <(1-x)^6 + (1-y)^6, 0> under the nonlocal operator with bulk modulus
/// 35/9 (the value for which the closed form below is exact).
inline constexpr double kPolyBulkModulus = 35.0 / 9.0;
ManufacturedValue eval_nonlocal_poly(double x, double y, double delta);

/// u = <sin x sin y, cos x cos y> under the local Navier operator with
/// bulk modulus 1 and Poisson ratio 1/4: L[u] = -(6/5) u.
ManufacturedValue eval_local_trig(double x, double y);

/// Linear field traction-free on x = 0 for Lame parameters lambda = mu.
ManufacturedValue eval_patch(double x, double y);

class CrackTipError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class CrackFace { upper, lower };

struct TypeICrack {
  double sigma0 = 1.0;
  double half_length = 1.0;
  double bulk_modulus = 4e4;
  double poisson_ratio = 0.25;

  bool operator==(const TypeICrack&) const = default;
};

/// Plane-strain displacement of a crack (-a, 0)-(a, 0) under remote biaxial
/// tension. Points on the open crack need `face`; the tips throw.
Vec2 eval_typeI(double x, double y, const TypeICrack& p, std::optional<CrackFace> face = std::nullopt);

struct ErrorNorms {
  double l2 = 0.0;   // root mean square of |F|
  double sup = 0.0;  // max |F|
};

/// Norms of numeric - exact over `subset` (all particles when empty).
ErrorNorms error_norms(std::span<const Vec2> numeric, std::span<const Vec2> exact,
                       std::span<const std::uint32_t> subset = {});

struct ConvergenceFit {
  double slope = 0.0;
  bool exact = false;  // some error was zero: slope undefined
};

/// Least-squares slope of log(error) against log(h) over the `window`
/// smallest resolutions.
ConvergenceFit convergence_slope(std::span<const double> h, std::span<const double> errors, std::size_t window = 3);

struct ConvergenceRow {
  double h = 0.0;
  double delta = 0.0;
  int n = 0;
  double l2 = 0.0;
  double sup = 0.0;
};

/// `h,delta,n,l2,sup,slope_running`; the running slope fits the l2 column over
/// up to three rows ending at the current one and is empty on the first row.
void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows);

/// Interior particles with |y - y0| < band (a horizontal line sample).
std::vector<std::uint32_t> line_subset_y(const PointCloud& cloud, double y0, double band);
/// Interior particles with |x - x0| < band.
std::vector<std::uint32_t> line_subset_x(const PointCloud& cloud, double x0, double band);

}  // namespace pdq
