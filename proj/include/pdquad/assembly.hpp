#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdquad/bonds.hpp"
#include "pdquad/geometry.hpp"
#include "pdquad/parallel.hpp"
#include "pdquad/quadrature.hpp"

namespace pdq {

/// Row-major so rows map to particles; unknowns are interleaved (2p, 2p + 1).
using SparseMatrixR = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interior particle with every bond broken but nonzero load (statics).
class FloatingParticleError : public AssemblyError {
 public:
  explicit FloatingParticleError(std::uint32_t p);
  std::uint32_t particle;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

struct GlobalSystem {
  SparseMatrixR matrix;
  Eigen::VectorXd rhs;
  std::vector<std::uint8_t> boundary;   // per particle
  std::vector<std::uint8_t> dirichlet;  // per particle: row replaced by identity
  /// Interior particles whose rows were pinned because all bonds are broken.
  std::vector<std::uint32_t> floating;

  std::size_t particles() const { return boundary.size(); }
};

enum class DirichletPolicy { boundary_only, any_particle };

/// Replaces the rows of `particles` by identity rows with the given values.
/// Interior particles are rejected unless `policy` allows them.
void apply_dirichlet(GlobalSystem& sys, std::span<const std::uint32_t> particles, std::span<const Vec2> values,
                     DirichletPolicy policy = DirichletPolicy::boundary_only);

/// Fixed sparsity pattern for a cloud and rule. Broken bonds keep their slots
/// (as explicit zeros) so the pattern, and a symbolic factorization, survive
/// damage.
class SystemAssembler {
 public:
  SystemAssembler(const PointCloud& cloud, const QuadratureRule& rule);

  /// Zero-valued system with the full pattern and boundary rows as identity.
  GlobalSystem make_system() const;

  /// Interior rows become mass * I - L with L the bond operator for `weights`
  /// (rule layout); boundary rows become identity. Interior particles with no
  /// nonzero weight get identity rows and are listed in `sys.floating`.
  /// The right-hand side is left alone.
  void fill(GlobalSystem& sys, std::span<const double> weights, double c, double mass,
            const Execution& exec = {}) const;

  const QuadratureRule& rule() const { return *rule_; }

 private:
  const QuadratureRule* rule_;
  std::size_t particles_ = 0;
  std::vector<std::uint8_t> boundary_;
  SparseMatrixR pattern_;
  std::vector<std::uint32_t> bond_slot_;  // per directed entry: column block within its row
  std::vector<std::uint32_t> self_slot_;  // per interior ordinal
};

/// -sum_j K_ij (u_j - u_i) w~_ji = f_i on interior rows, u = u_D on boundary
/// rows. `f` and `u_dirichlet` are per particle. A floating interior particle
/// is pinned to zero if its load vanishes and rejected otherwise.
GlobalSystem assemble_static(const PointCloud& cloud, double c, const QuadratureRule& rule, const BondTable& bonds,
                             std::span<const Vec2> f, std::span<const Vec2> u_dirichlet,
                             const Execution& exec = {});

enum class SolverKind { sparse_lu, gmres };

struct SolverOptions {
  SolverKind kind = SolverKind::sparse_lu;
  double rel_tol = 1e-10;
  int max_iter = 2000;
  int restart = 60;

  bool operator==(const SolverOptions&) const = default;
};

struct SolveReport {
  double residual = 0.0;  // ||D (A u - b)||_2 / ||D b||_2, D = row equilibration
  int iterations = 0;
};

/// Reusable solver: `compute` factors (or preconditions) a matrix; `solve`
/// enforces ||A u - b|| <= rel_tol ||b|| and throws SolverError otherwise.
class LinearSolver {
 public:
  explicit LinearSolver(SolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  void compute(const SparseMatrixR& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveReport* report = nullptr);

 private:
  struct Impl;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve_linear(const GlobalSystem& sys, const SolverOptions& options = {},
                             SolveReport* report = nullptr);

/// y = A x through the dispatched CSR kernel.
void spmv(const SparseMatrixR& a, const Eigen::VectorXd& x, Eigen::VectorXd& y);

/// `rows cols nnz` header, then `row col value` per stored entry (0-based).
void write_triplets(std::ostream& os, const SparseMatrixR& a);

/// Interleaved vector <-> per-particle field.
Eigen::VectorXd pack(std::span<const Vec2> field);
std::vector<Vec2> unpack(const Eigen::VectorXd& v);

}  // namespace pdq
