#include "pdquad/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "pdquad/format.hpp"

namespace pdq {

ManufacturedValue eval_nonlocal_poly(double x, double y, double delta) {
  const double X = 1.0 - x;
  const double Y = 1.0 - y;
  const double X2 = X * X;
  const double Y2 = Y * Y;
  const double d2 = delta * delta;
  const double L = 210.0 * X2 * X2 + 70.0 * Y2 * Y2 + d2 * (105.0 * X2 + 21.0 * Y2) + 5.0 * d2 * d2;
  ManufacturedValue v;
  v.displacement = {X2 * X2 * X2 + Y2 * Y2 * Y2, 0.0};
  v.operator_value = {L, 0.0};
  v.forcing = -v.operator_value;
  return v;
}

ManufacturedValue eval_local_trig(double x, double y) {
  ManufacturedValue v;
  v.displacement = {std::sin(x) * std::sin(y), std::cos(x) * std::cos(y)};
  v.operator_value = -1.2 * v.displacement;
  v.forcing = 1.2 * v.displacement;
  return v;
}

ManufacturedValue eval_patch(double x, double y) {
  return {{x + y, -x - 3.0 * y}, {0.0, 0.0}, {0.0, 0.0}};
}

Vec2 eval_typeI(double x, double y, const TypeICrack& p, std::optional<CrackFace> face) {
  const double a = p.half_length;
  const double r1 = std::hypot(x - a, y);
  const double r2 = std::hypot(x + a, y);
  if (r1 == 0.0 || r2 == 0.0) throw CrackTipError("Type-I field evaluated at a crack tip");
  double yy = y;
  if (y == 0.0 && std::abs(x) < a) {
    if (!face) throw CrackTipError("point on the crack needs a face");
    yy = *face == CrackFace::upper ? 0.0 : -0.0;
  }
  const double r = std::hypot(x, y);
  const double theta = std::atan2(yy, x);
  const double theta1 = std::atan2(yy, x - a);
  const double theta2 = std::atan2(yy, x + a);
  const double mu = 3.0 * p.bulk_modulus * (1.0 - 2.0 * p.poisson_ratio) / (2.0 * (1.0 + p.poisson_ratio));
  const double kol = 3.0 - 4.0 * p.poisson_ratio;
  const double s = std::sqrt(r1 * r2);
  const double half = 0.5 * (theta1 + theta2);
  const double phase = theta - half;
  const double tail = p.sigma0 * r * r / s * std::sin(theta);
  const double u = 0.5 * (kol - 1.0) * p.sigma0 * s * std::cos(half) - tail * std::sin(phase);
  const double v = 0.5 * (kol + 1.0) * p.sigma0 * s * std::sin(half) - tail * std::cos(phase);
  return {u / (2.0 * mu), v / (2.0 * mu)};
}

ErrorNorms error_norms(std::span<const Vec2> numeric, std::span<const Vec2> exact,
                       std::span<const std::uint32_t> subset) {
  if (numeric.size() != exact.size()) throw std::invalid_argument("error_norms: field sizes differ");
  const std::size_t n = subset.empty() ? numeric.size() : subset.size();
  if (n == 0) throw std::invalid_argument("error_norms: empty particle subset");
  double sum = 0.0;
  double sup = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = subset.empty() ? k : subset[k];
    const double e = norm(numeric[p] - exact[p]);
    sum += e * e;
    sup = std::max(sup, e);
  }
  return {std::sqrt(sum / static_cast<double>(n)), sup};
}

ConvergenceFit convergence_slope(std::span<const double> h, std::span<const double> errors, std::size_t window) {
  if (h.size() != errors.size()) throw std::invalid_argument("convergence_slope: size mismatch");
  if (h.size() < 2 || window < 2) throw std::invalid_argument("convergence_slope needs at least two points");
  std::vector<std::size_t> idx(h.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return h[a] < h[b]; });
  idx.resize(std::min(window, idx.size()));
  ConvergenceFit fit;
  double mx = 0.0, my = 0.0;
  for (const auto i : idx) {
    if (!(h[i] > 0.0)) throw std::invalid_argument("convergence_slope: resolutions must be positive");
    if (!(errors[i] > 0.0)) {
      fit.exact = true;
      return fit;
    }
    mx += std::log(h[i]);
    my += std::log(errors[i]);
  }
  const double m = static_cast<double>(idx.size());
  mx /= m;
  my /= m;
  double sxy = 0.0, sxx = 0.0;
  for (const auto i : idx) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("convergence_slope: resolutions are not distinct");
  fit.slope = sxy / sxx;
  return fit;
}

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows) {
  os << "h,delta,n,l2,sup,slope_running\n";
  std::vector<double> hs, es;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    hs.push_back(r.h);
    es.push_back(r.l2);
    os << fmt_double(r.h) << ',' << fmt_double(r.delta) << ',' << r.n << ',' << fmt_double(r.l2) << ','
       << fmt_double(r.sup) << ',';
    if (i > 0) {
      const std::size_t lo = i >= 2 ? i - 2 : 0;
      const auto fit = convergence_slope(std::span(hs).subspan(lo), std::span(es).subspan(lo));
      if (fit.exact)
        os << "exact";
      else
        os << fmt_double(fit.slope);
    }
    os << '\n';
  }
}

std::vector<std::uint32_t> line_subset_y(const PointCloud& cloud, double y0, double band) {
  std::vector<std::uint32_t> out;
  for (const auto p : cloud.interior())
    if (std::abs(cloud.position(p).y - y0) < band) out.push_back(p);
  return out;
}

std::vector<std::uint32_t> line_subset_x(const PointCloud& cloud, double x0, double band) {
  std::vector<std::uint32_t> out;
  for (const auto p : cloud.interior())
    if (std::abs(cloud.position(p).x - x0) < band) out.push_back(p);
  return out;
}

}  // namespace pdq
