#include "pdquad/bonds.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace pdq {

BondTable::BondTable(const QuadratureRule& rule, std::size_t particle_count)
    : incident_(particle_count, 0), broken_incident_(particle_count, 0) {
  const auto centers = rule.centers();
  const auto offsets = rule.offsets();
  const auto nbr = rule.neighbors();
  directed_.resize(nbr.size());
  std::unordered_map<std::uint64_t, std::uint32_t> ids;
  ids.reserve(nbr.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const std::uint32_t p = centers[k];
    for (std::size_t e = offsets[k]; e < offsets[k + 1]; ++e) {
      const std::uint32_t q = nbr[e];
      if (p >= particle_count || q >= particle_count) throw std::out_of_range("bond endpoint out of range");
      const std::uint32_t lo = std::min(p, q);
      const std::uint32_t hi = std::max(p, q);
      const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
      auto [it, fresh] = ids.try_emplace(key, static_cast<std::uint32_t>(ends_.size()));
      if (fresh) {
        ends_.emplace_back(lo, hi);
        ++incident_[lo];
        ++incident_[hi];
      }
      directed_[e] = it->second;
    }
  }
  broken_at_.assign(ends_.size(), unbroken);
}

bool BondTable::break_bond(std::size_t b, std::int32_t step) {
  if (broken_at_.at(b) != unbroken) return false;
  broken_at_[b] = step;
  ++broken_total_;
  ++broken_incident_[ends_[b].first];
  ++broken_incident_[ends_[b].second];
  return true;
}

double BondTable::damage(std::size_t p) const {
  return incident_[p] == 0 ? 0.0 : static_cast<double>(broken_incident_[p]) / incident_[p];
}

std::vector<double> BondTable::damage() const {
  std::vector<double> d(incident_.size());
  for (std::size_t p = 0; p < d.size(); ++p) d[p] = damage(p);
  return d;
}

void BondTable::masked_weights(const QuadratureRule& rule, std::vector<double>& out) const {
  const auto w = rule.weights();
  if (w.size() != directed_.size()) throw std::invalid_argument("bond table does not match the quadrature rule");
  out.resize(w.size());
  for (std::size_t e = 0; e < w.size(); ++e) out[e] = broken(directed_[e]) ? 0.0 : w[e];
}

}  // namespace pdq
