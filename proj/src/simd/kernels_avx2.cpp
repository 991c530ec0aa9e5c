// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <cmath>

#include "pdquad/simd.hpp"

namespace pdq::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void bond_force_sum(const BondBatch& b, double c, double* fx, double* fy) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d ax = _mm256_setzero_pd();
  __m256d ay = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= b.size; k += 4) {
    const __m256d x = _mm256_loadu_pd(b.xi_x + k);
    const __m256d y = _mm256_loadu_pd(b.xi_y + k);
    const __m256d ux = _mm256_loadu_pd(b.du_x + k);
    const __m256d uy = _mm256_loadu_pd(b.du_y + k);
    const __m256d w = _mm256_loadu_pd(b.weight + k);
    const __m256d r2 = _mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y));
    const __m256d r3 = _mm256_mul_pd(r2, _mm256_sqrt_pd(r2));
    const __m256d s = _mm256_div_pd(_mm256_mul_pd(vc, w), r3);
    const __m256d proj = _mm256_fmadd_pd(x, ux, _mm256_mul_pd(y, uy));
    const __m256d sp = _mm256_mul_pd(s, proj);
    ax = _mm256_fmadd_pd(sp, x, ax);
    ay = _mm256_fmadd_pd(sp, y, ay);
  }
  double sx = hsum(ax);
  double sy = hsum(ay);
  for (; k < b.size; ++k) {
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
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x = _mm256_loadu_pd(xi_x + k);
    const __m256d y = _mm256_loadu_pd(xi_y + k);
    const __m256d r2 = _mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y));
    const __m256d r3 = _mm256_mul_pd(r2, _mm256_sqrt_pd(r2));
    const __m256d s = _mm256_div_pd(_mm256_mul_pd(vc, _mm256_loadu_pd(w + k)), r3);
    const __m256d sx = _mm256_mul_pd(s, x);
    _mm256_storeu_pd(bxx + k, _mm256_mul_pd(sx, x));
    _mm256_storeu_pd(bxy + k, _mm256_mul_pd(sx, y));
    _mm256_storeu_pd(byy + k, _mm256_mul_pd(_mm256_mul_pd(s, y), y));
  }
  for (; k < n; ++k) {
    const double r2 = xi_x[k] * xi_x[k] + xi_y[k] * xi_y[k];
    const double s = c * w[k] / (r2 * std::sqrt(r2));
    bxx[k] = s * xi_x[k] * xi_x[k];
    bxy[k] = s * xi_x[k] * xi_y[k];
    byy[k] = s * xi_y[k] * xi_y[k];
  }
}

void bond_strains(const double* xi_x, const double* xi_y, const double* du_x, const double* du_y, std::size_t n,
                  double* strain) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d x = _mm256_loadu_pd(xi_x + k);
    const __m256d y = _mm256_loadu_pd(xi_y + k);
    const __m256d r0 = _mm256_sqrt_pd(_mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y)));
    const __m256d ex = _mm256_add_pd(x, _mm256_loadu_pd(du_x + k));
    const __m256d ey = _mm256_add_pd(y, _mm256_loadu_pd(du_y + k));
    const __m256d r1 = _mm256_sqrt_pd(_mm256_fmadd_pd(ex, ex, _mm256_mul_pd(ey, ey)));
    _mm256_storeu_pd(strain + k, _mm256_div_pd(_mm256_sub_pd(r1, r0), r0));
  }
  for (; k < n; ++k) {
    const double r0 = std::sqrt(xi_x[k] * xi_x[k] + xi_y[k] * xi_y[k]);
    const double ex = xi_x[k] + du_x[k];
    const double ey = xi_y[k] + du_y[k];
    strain[k] = (std::sqrt(ex * ex + ey * ey) - r0) / r0;
  }
}

void spmv(const CsrView& a, const double* x, double* y) {
  for (std::int64_t r = 0; r < a.rows; ++r) {
    int k = a.outer[r];
    const int end = a.outer[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.inner + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.values + k), xv, acc);
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += a.values[k] * x[a.inner[k]];
    y[r] = s;
  }
}

}  // namespace pdq::simd::avx2
