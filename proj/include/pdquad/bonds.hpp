#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pdquad/geometry.hpp"
#include "pdquad/quadrature.hpp"

namespace pdq {

/// Undirected bond states over a quadrature rule's stencils. A bond {p, q}
/// owns both directed stencil entries (p in q's stencil and q in p's) and
/// breaks them together. Bonds only go from unbroken to broken.
class BondTable {
 public:
  static constexpr std::int32_t unbroken = -1;

  BondTable() = default;
  BondTable(const QuadratureRule& rule, std::size_t particle_count);

  std::size_t bond_count() const { return ends_.size(); }
  std::size_t particle_count() const { return incident_.size(); }
  std::pair<std::uint32_t, std::uint32_t> endpoints(std::size_t b) const { return ends_[b]; }
  /// Undirected bond of each flat stencil entry.
  std::span<const std::uint32_t> directed_bonds() const { return directed_; }

  bool broken(std::size_t b) const { return broken_at_[b] != unbroken; }
  /// Step at which the bond broke (0 for preprocessing), or `unbroken`.
  std::int32_t broken_at(std::size_t b) const { return broken_at_[b]; }
  /// Returns true if the bond was intact.
  bool break_bond(std::size_t b, std::int32_t step);
  std::size_t broken_count() const { return broken_total_; }

  /// Number of bonds touching p at construction.
  std::uint32_t initial_bonds(std::size_t p) const { return incident_[p]; }
  std::uint32_t broken_bonds(std::size_t p) const { return broken_incident_[p]; }
  /// broken / initial bonds, 0 for particles without bonds.
  double damage(std::size_t p) const;
  std::vector<double> damage() const;

  /// Weights with every broken bond zeroed, in the rule's layout.
  void masked_weights(const QuadratureRule& rule, std::vector<double>& out) const;

 private:
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ends_;
  std::vector<std::uint32_t> directed_;
  std::vector<std::int32_t> broken_at_;
  std::vector<std::uint32_t> incident_;
  std::vector<std::uint32_t> broken_incident_;
  std::size_t broken_total_ = 0;
};

}  // namespace pdq
