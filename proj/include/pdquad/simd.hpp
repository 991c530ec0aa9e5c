#pragma once

// Data-parallel inner loops: a scalar reference implementation and an AVX2
// variant of each kernel, selected once at runtime. The two agree to
// rounding (reduction order differs); see tests/test_simd.cpp.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pdq::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Structure-of-arrays view over the bonds of one stencil.
struct BondBatch {
  const double* xi_x = nullptr;
  const double* xi_y = nullptr;
  const double* du_x = nullptr;
  const double* du_y = nullptr;
  const double* weight = nullptr;
  std::size_t size = 0;
};

/// Compressed-row matrix view (Eigen row-major layout).
struct CsrView {
  std::int64_t rows = 0;
  const int* outer = nullptr;  // rows + 1 offsets
  const int* inner = nullptr;  // column indices
  const double* values = nullptr;
};

struct KernelTable {
  Isa isa;
  /// sum_k w_k c xi_k (xi_k . du_k) / |xi_k|^3, returned as (fx, fy).
  void (*bond_force_sum)(const BondBatch& b, double c, double* fx, double* fy);
  /// Per-bond stiffness blocks c w_k xi_k xi_k^T / |xi_k|^3.
  void (*bond_blocks)(const double* xi_x, const double* xi_y, const double* w, std::size_t n, double c,
                      double* bxx, double* bxy, double* byy);
  /// (|xi + du| - |xi|) / |xi| per bond.
  void (*bond_strains)(const double* xi_x, const double* xi_y, const double* du_x, const double* du_y,
                       std::size_t n, double* strain);
  /// y = A x
  void (*spmv)(const CsrView& a, const double* x, double* y);
};

/// Table for the best ISA the CPU supports (PDQ_SIMD=scalar forces the
/// reference path). Chosen once per process.
const KernelTable& kernels();

/// Table for a specific ISA; throws if the CPU lacks it.
const KernelTable& kernels_for(Isa isa);

bool supported(Isa isa);

namespace scalar {
void bond_force_sum(const BondBatch& b, double c, double* fx, double* fy);
void bond_blocks(const double* xi_x, const double* xi_y, const double* w, std::size_t n, double c, double* bxx,
                 double* bxy, double* byy);
void bond_strains(const double* xi_x, const double* xi_y, const double* du_x, const double* du_y, std::size_t n,
                  double* strain);
void spmv(const CsrView& a, const double* x, double* y);
}  // namespace scalar

namespace avx2 {
void bond_force_sum(const BondBatch& b, double c, double* fx, double* fy);
void bond_blocks(const double* xi_x, const double* xi_y, const double* w, std::size_t n, double c, double* bxx,
                 double* bxy, double* byy);
void bond_strains(const double* xi_x, const double* xi_y, const double* du_x, const double* du_y, std::size_t n,
                  double* strain);
void spmv(const CsrView& a, const double* x, double* y);
}  // namespace avx2

}  // namespace pdq::simd
