#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdquad/assembly.hpp"
#include "pdquad/dynamics.hpp"
#include "pdquad/kernels.hpp"
#include "pdquad/quadrature.hpp"
#include "pdquad/verification.hpp"

namespace pdq {

struct DiscretizationOptions {
  int order = 2;
  double ratio = 0.0;  // delta / h; 0 selects order + 1/2
  double perturbation = 0.1;
  std::uint64_t seed = 1;
  /// Convergence experiments repeat each resolution with seeds seed, seed + 1,
  /// ... and report the geometric mean of the errors.
  int ensemble = 1;
  BasisKind basis = BasisKind::componentwise;
  SolverOptions solver;
  Execution exec;

  double effective_ratio() const { return ratio > 0.0 ? ratio : order + 0.5; }

  bool operator==(const DiscretizationOptions&) const = default;
};

/// A point cloud with its quadrature rule.
struct Discretization {
  PointCloud cloud;
  QuadratureRule rule;
};

Discretization discretize(const Domain2D& domain, int nx, int ny, const DiscretizationOptions& opt);

/// Omega = [-pi, pi]^2 with a collar of ratio * spacing.
Domain2D periodic_box(int n, double ratio);

enum class ManufacturedCase { nonlocal_poly, local_trig };

struct ConvergenceResult {
  std::vector<ConvergenceRow> truncation;
  std::vector<ConvergenceRow> solution;
  ConvergenceFit truncation_fit;
  ConvergenceFit solution_fit;
};

/// Geometric mean of l2 and sup over rows sharing one resolution.
ConvergenceRow ensemble_mean(std::span<const ConvergenceRow> rows);

/// Truncation error ||L_h[u] - L[u]|| and static solution error ||u_h - u||
/// over interior particles for each resolution n x n on [-pi, pi]^2.
ConvergenceResult run_convergence(ManufacturedCase which, std::span<const int> resolutions,
                                  const DiscretizationOptions& opt, bool truncation = true, bool solve = true);

struct PatchCrackResult {
  std::vector<ConvergenceRow> rows;  // error along y = 0
  ConvergenceFit l2_fit;
  ConvergenceFit sup_fit;
};

/// Linear traction-free field with every bond crossing x = 0 broken.
PatchCrackResult run_patch_crack(std::span<const int> resolutions, const DiscretizationOptions& opt);

struct TypeIOptions {
  TypeICrack crack;
  double box = 2.0;  // Omega = [-box, box]^2
  int profile_resolution = 64;
  /// Profile comparison skips particles closer than this multiple of delta
  /// to a crack tip.
  double tip_exclusion = 2.0;

  bool operator==(const TypeIOptions&) const = default;
};

struct TypeIResult {
  std::vector<ConvergenceRow> rows_y0;
  std::vector<ConvergenceRow> rows_x0;
  ConvergenceFit fit_y0;
  ConvergenceFit fit_x0;
  /// max |u_h - u| / max |u| over both lines at the profile resolution,
  /// first ensemble member only.
  std::optional<double> profile_deviation;
  /// (x, y, uh_x, uh_y, u_x, u_y) per line particle at the profile resolution.
  std::vector<std::array<double, 6>> profile;
};

TypeIResult run_typeI(std::span<const int> resolutions, const DiscretizationOptions& opt, const TypeIOptions& t);

struct KalthoffOptions {
  double width = 0.2;   // along the impacted edge
  double height = 0.1;
  int nx = 128;
  int ny = 64;
  double notch_offset = 0.025;  // notch distance from the plate center line
  double notch_length = 0.05;
  double impact_speed = 32.0;
  MaterialModel material{.bulk_modulus = 190e9 / 1.5, .poisson_ratio = 0.25, .density = 8000.0};
  double dt = 1e-6;
  int steps = 100;
  double critical_strain = 0.0;  // resolved by the caller
  StrainMeasure strain = StrainMeasure::deformed_length;
  double angle_radius_h = 15.0;  // crack-angle fit radius in lattice spacings
  double damage_threshold = 0.3;
  int snapshot_every = 0;       // 0 disables snapshots
  std::filesystem::path snapshot_dir;

  bool operator==(const KalthoffOptions&) const = default;
};

struct KalthoffResult {
  double horizon = 0.0;
  double critical_strain = 0.0;
  CrackAngle left;
  CrackAngle right;
  std::size_t fragments = 0;
  std::size_t broken_preprocess = 0;
  std::size_t broken_dynamic = 0;
  int steps = 0;
};

using StepObserver = std::function<void(const SimulationState&, const StepReport&)>;

KalthoffResult run_kalthoff(const KalthoffOptions& k, const DiscretizationOptions& opt,
                            const StepObserver& observer = {});

/// Horizon of the Kalthoff lattice: ratio * max(width / (nx - 1), height / (ny - 1)).
double kalthoff_horizon(const KalthoffOptions& k, double ratio);

}  // namespace pdq
