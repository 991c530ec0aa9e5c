#include <cmath>

#include "pdquad/simd.hpp"

namespace pdq::simd::scalar {

void bond_force_sum(const BondBatch& b, double c, double* fx, double* fy) {
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < b.size; ++k) {
    const double r2 = b.xi_x[k] * b.xi_x[k] + b.xi_y[k] * b.xi_y[k];
    const double s = c * b.weight[k] / (r2 * std::sqrt(r2));
    const double proj = b.xi_x[k] * b.du_x[k] + b.xi_y[k] * b.du_y[k];
    sx += s * proj * b.xi_x[k];
    sy += s * proj * b.xi_y[k];
  }
  *fx = sx;
  *fy = sy;
}

void bond_blocks(const double* xi_x, const double* xi_y, const double* w, std::size_t n, double c, double* bxx,
                 double* bxy, double* byy) {
  for (std::size_t k = 0; k < n; ++k) {
    const double r2 = xi_x[k] * xi_x[k] + xi_y[k] * xi_y[k];
    const double s = c * w[k] / (r2 * std::sqrt(r2));
    bxx[k] = s * xi_x[k] * xi_x[k];
    bxy[k] = s * xi_x[k] * xi_y[k];
    byy[k] = s * xi_y[k] * xi_y[k];
  }
}

void bond_strains(const double* xi_x, const double* xi_y, const double* du_x, const double* du_y, std::size_t n,
                  double* strain) {
  for (std::size_t k = 0; k < n; ++k) {
    const double r0 = std::sqrt(xi_x[k] * xi_x[k] + xi_y[k] * xi_y[k]);
    const double ex = xi_x[k] + du_x[k];
    const double ey = xi_y[k] + du_y[k];
    strain[k] = (std::sqrt(ex * ex + ey * ey) - r0) / r0;
  }
}

void spmv(const CsrView& a, const double* x, double* y) {
  for (std::int64_t r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) acc += a.values[k] * x[a.inner[k]];
    y[r] = acc;
  }
}

}  // namespace pdq::simd::scalar
