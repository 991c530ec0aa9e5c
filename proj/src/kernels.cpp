#include "pdquad/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pdq {

double MaterialModel::shear_modulus() const {
  return 3.0 * bulk_modulus * (1.0 - 2.0 * poisson_ratio) / (2.0 * (1.0 + poisson_ratio));
}

void MaterialModel::validate() const {
  if (!(bulk_modulus > 0.0)) throw KernelError("bulk modulus must be positive");
  if (!(density > 0.0)) throw KernelError("density must be positive");
  if (dimension != 2 && dimension != 3) throw KernelError("unsupported dimension " + std::to_string(dimension));
  if (fracture_energy && !(*fracture_energy >= 0.0)) throw KernelError("fracture energy must be non-negative");
}

double material_constant(double bulk_modulus, double horizon, int dimension) {
  if (!(bulk_modulus > 0.0) || !(horizon > 0.0))
    throw KernelError("material constant needs positive bulk modulus and horizon");
  using std::numbers::pi;
  switch (dimension) {
    case 2:
      return 72.0 * bulk_modulus / (5.0 * pi * horizon * horizon * horizon);
    case 3:
      return 18.0 * bulk_modulus / (pi * horizon * horizon * horizon * horizon);
    default:
      throw KernelError("unsupported dimension " + std::to_string(dimension));
  }
}

Mat2 kernel_matrix(Vec2 xi, double c) {
  const double r2 = dot(xi, xi);
  if (!(r2 > 0.0)) throw KernelError("kernel evaluated at zero separation");
  const double s = c / (r2 * std::sqrt(r2));
  return {s * xi.x * xi.x, s * xi.x * xi.y, s * xi.y * xi.y};
}

double critical_strain(const MaterialModel& mat, double horizon) {
  if (!mat.fracture_energy) throw KernelError("critical strain needs a fracture energy");
  if (!(horizon > 0.0)) throw KernelError("horizon must be positive");
  using std::numbers::pi;
  const double gc = *mat.fracture_energy;
  const double mu = mat.shear_modulus();
  const double K = mat.bulk_modulus;
  double denom = 0.0;
  if (mat.dimension == 2) {
    denom = 6.0 * mu / pi + 16.0 / (9.0 * pi * pi) * (K - 2.0 * mu);
  } else if (mat.dimension == 3) {
    denom = 3.0 * mu + std::pow(0.75, 4) * (K - 5.0 * mu / 3.0);
  } else {
    throw KernelError("unsupported dimension " + std::to_string(mat.dimension));
  }
  if (!(denom > 0.0)) throw KernelError("critical strain denominator is not positive");
  return std::sqrt(gc / (denom * horizon));
}

double KernelDescriptor::profile(double r) const {
  if (custom_profile) return custom_profile(r);
  return scale * std::pow(r, -radial_power);
}

PeridynamicKernel::PeridynamicKernel(double bulk_modulus, double horizon, int dimension)
    : horizon_(horizon), c_(material_constant(bulk_modulus, horizon, dimension)), dimension_(dimension) {
  if (dimension != 2) throw KernelError("only the 2D kernel matrix is implemented");
}

KernelDescriptor PeridynamicKernel::descriptor() const {
  KernelDescriptor d;
  d.horizon = horizon_;
  d.scale = c_;
  d.radial_power = 3.0;
  d.singularity_order = singularity_order;
  d.numerator_degree = 2;
  d.components = {{0, 0, {2, 0}}, {0, 1, {1, 1}}, {1, 1, {0, 2}}};
  return d;
}

}  // namespace pdq
