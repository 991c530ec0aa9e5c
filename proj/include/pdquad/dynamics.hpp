#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "pdquad/assembly.hpp"
#include "pdquad/bonds.hpp"
#include "pdquad/geometry.hpp"
#include "pdquad/quadrature.hpp"

namespace pdq {

/// deformed_length: (|xi + u_j - u_i| - |xi|) / |xi|.
/// relative_displacement: |u_j - u_i| / |xi| (not rotation invariant).
enum class StrainMeasure { deformed_length, relative_displacement };

double bond_strain(Vec2 x_i, Vec2 x_j, Vec2 u_i, Vec2 u_j,
                   StrainMeasure measure = StrainMeasure::deformed_length);

/// Breaks (at step 0) every bond whose segment touches a crack or a
/// traction-free segment. Returns the number of bonds broken.
std::size_t preprocess_cracks(const PointCloud& cloud, BondTable& bonds, std::span<const Segment> cracks,
                              std::span<const Segment> free_surfaces);

struct SimulationState {
  std::vector<Vec2> u_prev;  // u^{n-1}
  std::vector<Vec2> u;       // u^n
  std::vector<Vec2> u_next;  // u^{n+1} after the latest step
  std::int64_t step = 0;
  double dt = 0.0;
  double t = 0.0;
  BondTable bonds;
};

/// Fills `out[n]` with the prescribed displacement of boundary particle
/// `boundary[n]` at time t.
using DirichletFn = std::function<void(double t, std::span<const std::uint32_t> boundary, std::span<Vec2> out)>;

struct DynamicsOptions {
  double density = 1.0;
  double dt = 1.0;
  double critical_strain = std::numeric_limits<double>::infinity();
  StrainMeasure strain = StrainMeasure::deformed_length;
  SolverOptions solver;
  Execution exec;
};

struct StepReport {
  std::size_t newly_broken = 0;
  std::size_t floating = 0;
  double residual = 0.0;
  bool refactored = false;
};

/// rho (u^{n+1} - 2 u^n + u^{n-1}) / dt^2 = L~ u^{n+1} + f on interior
/// particles, Dirichlet data on the collar, bonds broken after each solve.
class ImplicitIntegrator {
 public:
  ImplicitIntegrator(const PointCloud& cloud, const QuadratureRule& rule, double c, DynamicsOptions options,
                     DirichletFn dirichlet, std::vector<Vec2> body_force = {});

  /// Rest state (u^0 = u^{-1} = 0) carrying the given bond table.
  SimulationState initial_state(BondTable bonds) const;

  StepReport step(SimulationState& state);

  const DynamicsOptions& options() const { return options_; }

 private:
  const PointCloud* cloud_;
  const QuadratureRule* rule_;
  double c_;
  DynamicsOptions options_;
  DirichletFn dirichlet_;
  std::vector<Vec2> body_force_;
  SystemAssembler assembler_;
  GlobalSystem system_;
  LinearSolver solver_;
  std::size_t factored_broken_ = std::numeric_limits<std::size_t>::max();
  std::vector<double> weights_;
  std::vector<double> bond_xi_x_, bond_xi_y_;
  std::vector<double> du_x_, du_y_, strain_;
  std::vector<Vec2> boundary_values_;
};

/// Connected components of the interior particles joined by intact bonds,
/// counting only components with at least `min_size` particles.
std::size_t fragment_count(const PointCloud& cloud, const BondTable& bonds, std::size_t min_size = 4);

/// Fraction of each particle's bonds broken at step >= `from_step`.
std::vector<double> damage_since(const BondTable& bonds, std::int32_t from_step);

struct CrackAngle {
  double degrees = 0.0;   // angle between the fitted line and the vertical
  Vec2 direction;         // unit vector, pointing away from the tip
  std::size_t samples = 0;
};

/// Total-least-squares line through the interior particles within `radius`
/// of `tip` whose damage (from bonds broken at step >= 1) is at least
/// `threshold` and which lie no higher than the tip.
CrackAngle measure_crack_angle(const PointCloud& cloud, const BondTable& bonds, Vec2 tip, double radius,
                               double threshold);

/// `id,x,y,ux,uy,damage`
void write_snapshot(std::ostream& os, const PointCloud& cloud, std::span<const Vec2> u, const BondTable& bonds);

}  // namespace pdq
