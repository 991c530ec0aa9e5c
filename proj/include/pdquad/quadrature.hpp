#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdquad/geometry.hpp"
#include "pdquad/kernels.hpp"
#include "pdquad/parallel.hpp"

namespace pdq {

class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stencil whose constraint residual exceeds the tolerance.
class UnisolvencyError : public std::runtime_error {
 public:
  UnisolvencyError(std::uint32_t particle, std::size_t stencil_size, double residual);
  std::uint32_t particle;
  std::size_t stencil_size;
  double residual;
};

/// Componentwise: constant plus K_ab(xi) (xi/delta)^gamma / gamma! for every
/// kernel component and |gamma| <= n (linearly redundant).
/// Reduced: constant plus profile(|xi|) xi^beta / delta^(|beta|-2) for
/// 2 <= |beta| <= n + 2, which spans the same space without redundancy.
enum class BasisKind { componentwise, reduced };

struct BasisEntry {
  bool constant = false;
  int component = -1;            // index into KernelDescriptor::components (componentwise)
  std::array<int, 2> gamma{};    // Taylor multi-index (componentwise)
  std::array<int, 2> power{};    // total power of xi in the numerator
  double coefficient = 1.0;      // 1 / (delta^|gamma| gamma!) or the reduced scale
};

/// Wallis-type angular integral of cos^p sin^q over [0, 2 pi].
double angular_moment(int p, int q);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

class ReproducingSpace {
 public:
  ReproducingSpace(KernelDescriptor kernel, int order, Vec2 center, BasisKind kind = BasisKind::componentwise);

  int order() const { return order_; }
  Vec2 center() const { return center_; }
  double horizon() const { return kernel_.horizon; }
  BasisKind kind() const { return kind_; }
  const KernelDescriptor& kernel() const { return kernel_; }
  std::span<const BasisEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Basis entry e at y = center + xi (xi != 0 for kernel entries).
  double evaluate(std::size_t e, Vec2 xi) const;

  /// Ball integrals of every entry over B(center, delta). Power-law kernels
  /// use the polar closed form; other profiles integrate the radial factor
  /// with Gauss-Legendre of `fallback_order` and 2 * `fallback_order` points
  /// and throw AccuracyError if the two disagree beyond `fallback_tol`.
  std::vector<double> exact_moments(int fallback_order = 24, double fallback_tol = 1e-12) const;

  /// Multiplier that makes row e O(1) for |xi| ~ delta.
  double row_scale(std::size_t e) const;

 private:
  KernelDescriptor kernel_;
  int order_;
  Vec2 center_;
  BasisKind kind_;
  std::vector<BasisEntry> entries_;
};

ReproducingSpace build_basis(const KernelDescriptor& kernel, int order, Vec2 center,
                             BasisKind kind = BasisKind::componentwise);

struct StencilDiagnostics {
  double residual = 0.0;  // ||B w - g||_inf / ||g||_inf on the scaled system
  int rank = 0;
  double condition = 0.0;
};

struct QuadratureOptions {
  int order = 2;
  BasisKind basis = BasisKind::componentwise;
  double rank_tol = 1e-10;
  double residual_tol = 1e-12;
  /// Throw UnisolvencyError on the first failing stencil instead of
  /// recording the failure in the diagnostics.
  bool strict = true;
  Execution exec;
};

/// Per-stencil weights laid out like PointCloud's flat stencil arrays, plus
/// cached bond vectors xi = x_j - x_i.
class QuadratureRule {
 public:
  std::size_t interior_count() const { return diagnostics_.size(); }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> weights(std::size_t k) const {
    return {weights_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  std::span<const double> xi_x() const { return xi_x_; }
  std::span<const double> xi_y() const { return xi_y_; }
  std::span<const std::uint32_t> offsets() const { return offsets_; }
  std::span<const std::uint32_t> neighbors() const { return neighbors_; }
  std::span<const std::uint32_t> centers() const { return centers_; }
  const StencilDiagnostics& diagnostics(std::size_t k) const { return diagnostics_[k]; }
  int order() const { return order_; }
  double residual_tol() const { return residual_tol_; }
  /// Every stencil residual within tolerance.
  bool valid() const;
  double max_residual() const;

  /// `i,stencil_size,residual,rank,cond_estimate`, one row per interior particle.
  void write_diagnostics_csv(std::ostream& os) const;

 private:
  friend QuadratureRule generate_weights(const PointCloud&, const KernelDescriptor&, const QuadratureOptions&);
  std::vector<std::uint32_t> centers_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> neighbors_;
  std::vector<double> weights_;
  std::vector<double> xi_x_;
  std::vector<double> xi_y_;
  std::vector<StencilDiagnostics> diagnostics_;
  int order_ = 0;
  double residual_tol_ = 0.0;
};

/// Minimal-norm weights reproducing the ball integrals of the space for every
/// interior stencil of `cloud`.
QuadratureRule generate_weights(const PointCloud& cloud, const KernelDescriptor& kernel,
                                const QuadratureOptions& options);

/// sum_j K(x_j - x_i) (u_j - u_i) w_j for interior ordinal k. `weights` may
/// substitute damage-masked weights with the rule's layout.
Vec2 apply_operator(const QuadratureRule& rule, double c, std::span<const Vec2> u, std::size_t k);
Vec2 apply_operator(const QuadratureRule& rule, std::span<const double> weights, double c,
                    std::span<const Vec2> u, std::size_t k);

/// The operator at every interior particle, indexed by interior ordinal.
std::vector<Vec2> apply_operator_all(const QuadratureRule& rule, double c, std::span<const Vec2> u,
                                     const Execution& exec = {});

}  // namespace pdq
