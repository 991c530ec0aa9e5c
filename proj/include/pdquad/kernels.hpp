#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pdquad/geometry.hpp"

namespace pdq {

class KernelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Symmetric 2x2 matrix.
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double trace() const { return xx + yy; }
};

struct MaterialModel {
  double bulk_modulus = 1.0;
  double poisson_ratio = 0.25;
  double density = 1.0;
  std::optional<double> fracture_energy;
  int dimension = 2;

  /// mu = 3 kappa (1 - 2 nu) / (2 (1 + nu)).
  double shear_modulus() const;
  void validate() const;

  bool operator==(const MaterialModel&) const = default;
};

/// Micromodulus c of the bond-based model: 72 kappa / (5 pi delta^3) in 2D,
/// 18 kappa / (pi delta^4) in 3D.
double material_constant(double bulk_modulus, double horizon, int dimension);

/// c xi xi^T / |xi|^3.
Mat2 kernel_matrix(Vec2 xi, double c);

/// Critical bond strain calibrated to the fracture energy.
double critical_strain(const MaterialModel& mat, double horizon);

/// Scalar component of a radial kernel: coefficient * xi^numerator * phi(|xi|),
/// tagged with the tensor entry (a, b) it belongs to.
struct KernelComponent {
  int a = 0;
  int b = 0;
  std::array<int, 2> numerator{0, 0};
};

/// What the quadrature generator needs to know about a kernel: its support,
/// singularity order, numerator structure, and radial profile. A power-law
/// profile scale * r^-radial_power has closed-form ball moments; any other
/// profile goes through the numeric radial fallback.
struct KernelDescriptor {
  double horizon = 0.0;
  double scale = 1.0;
  double radial_power = 0.0;
  int singularity_order = 0;
  int numerator_degree = 0;
  std::vector<KernelComponent> components;
  std::function<double(double)> custom_profile;

  bool power_law() const { return !custom_profile; }
  double profile(double r) const;
};

class PeridynamicKernel {
 public:
  static constexpr int singularity_order = 1;

  PeridynamicKernel(double bulk_modulus, double horizon, int dimension = 2);

  double horizon() const { return horizon_; }
  double constant() const { return c_; }
  int dimension() const { return dimension_; }

  Mat2 operator()(Vec2 xi) const { return kernel_matrix(xi, c_); }

  /// Components (1,1), (1,2), (2,2) of xi xi^T / |xi|^3 scaled by c.
  KernelDescriptor descriptor() const;

 private:
  double horizon_;
  double c_;
  int dimension_;
};

}  // namespace pdq
