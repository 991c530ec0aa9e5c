#include "pdquad/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>

#include "pdquad/format.hpp"

namespace pdq {

void Domain2D::validate() const {
  if (!(upper.x > lower.x && upper.y > lower.y))
    throw GeometryError("domain upper corner must dominate the lower corner");
  if (!(collar >= 0.0) || !std::isfinite(collar))
    throw GeometryError("collar thickness must be finite and non-negative");
}

bool Domain2D::contains(Vec2 p) const {
  return p.x >= lower.x && p.x <= upper.x && p.y >= lower.y && p.y <= upper.y;
}

double Domain2D::distance_to(Vec2 p) const {
  const double dx = std::max({lower.x - p.x, 0.0, p.x - upper.x});
  const double dy = std::max({lower.y - p.y, 0.0, p.y - upper.y});
  return std::hypot(dx, dy);
}

void LatticeSpec::validate() const {
  if (nx < 2 || ny < 2) throw GeometryError("lattice needs at least 2 points per axis");
  if (!(perturbation >= 0.0 && perturbation < 0.5))
    throw GeometryError("lattice perturbation must lie in [0, 0.5)");
}

std::string_view to_string(Region r) {
  return r == Region::interior ? "interior" : "boundary";
}

// ---------------------------------------------------------------------------
// CellGrid

CellGrid::CellGrid(std::span<const Vec2> points, double cell_size)
    : points_(points), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw GeometryError("cell size must be positive");
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const Vec2& p : points) {
    lo_.x = std::min(lo_.x, p.x);
    lo_.y = std::min(lo_.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  if (points.empty()) {
    lo_ = {0.0, 0.0};
    hi = {0.0, 0.0};
  }
  nx_ = static_cast<std::int64_t>(std::floor((hi.x - lo_.x) / cell_)) + 1;
  ny_ = static_cast<std::int64_t>(std::floor((hi.y - lo_.y) / cell_)) + 1;

  std::vector<std::uint32_t> cell_id(points.size());
  cell_start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cx = cell_of(points[i].x, lo_.x, nx_);
    const auto cy = cell_of(points[i].y, lo_.y, ny_);
    cell_id[i] = static_cast<std::uint32_t>(cy * nx_ + cx);
    ++cell_start_[cell_id[i] + 1];
  }
  for (std::size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
  sorted_.resize(points.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) sorted_[fill[cell_id[i]]++] = static_cast<std::uint32_t>(i);
}

std::int64_t CellGrid::cell_of(double v, double lo, std::int64_t n) const {
  const auto c = static_cast<std::int64_t>(std::floor((v - lo) / cell_));
  return std::clamp<std::int64_t>(c, 0, n - 1);
}

void CellGrid::neighbors(Vec2 p, double radius, std::vector<std::uint32_t>& out,
                         std::int64_t self) const {
  out.clear();
  const double r2 = radius * radius;
  const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
  const auto cx = static_cast<std::int64_t>(std::floor((p.x - lo_.x) / cell_));
  const auto cy = static_cast<std::int64_t>(std::floor((p.y - lo_.y) / cell_));
  for (std::int64_t y = std::max<std::int64_t>(0, cy - reach); y <= std::min(ny_ - 1, cy + reach); ++y) {
    for (std::int64_t x = std::max<std::int64_t>(0, cx - reach); x <= std::min(nx_ - 1, cx + reach); ++x) {
      const auto c = static_cast<std::size_t>(y * nx_ + x);
      for (std::uint32_t s = cell_start_[c]; s < cell_start_[c + 1]; ++s) {
        const std::uint32_t j = sorted_[s];
        if (static_cast<std::int64_t>(j) == self) continue;
        const Vec2 d = points_[j] - p;
        if (dot(d, d) <= r2) out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
}

double CellGrid::nearest_distance(Vec2 p) const {
  if (points_.empty()) return std::numeric_limits<double>::infinity();
  const auto cx = cell_of(p.x, lo_.x, nx_);
  const auto cy = cell_of(p.y, lo_.y, ny_);
  double best2 = std::numeric_limits<double>::infinity();
  const std::int64_t max_ring = std::max(nx_, ny_);
  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    for (std::int64_t y = cy - ring; y <= cy + ring; ++y) {
      if (y < 0 || y >= ny_) continue;
      const bool edge_row = (y == cy - ring || y == cy + ring);
      const std::int64_t step = edge_row ? 1 : std::max<std::int64_t>(1, 2 * ring);
      for (std::int64_t x = cx - ring; x <= cx + ring; x += step) {
        if (x < 0 || x >= nx_) continue;
        const auto c = static_cast<std::size_t>(y * nx_ + x);
        for (std::uint32_t s = cell_start_[c]; s < cell_start_[c + 1]; ++s) {
          const Vec2 d = points_[sorted_[s]] - p;
          best2 = std::min(best2, dot(d, d));
        }
      }
    }
    // Cells beyond this ring are at least ring * cell away.
    const double bound = static_cast<double>(ring) * cell_;
    if (best2 <= bound * bound) break;
  }
  return std::sqrt(best2);
}

std::vector<std::vector<std::uint32_t>> brute_force_neighbors(
    std::span<const Vec2> points, std::span<const std::uint32_t> centers, double radius) {
  std::vector<std::vector<std::uint32_t>> out(centers.size());
  const double r2 = radius * radius;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const Vec2 c = points[centers[k]];
    for (std::uint32_t j = 0; j < points.size(); ++j) {
      if (j == centers[k]) continue;
      const Vec2 d = points[j] - c;
      if (dot(d, d) <= r2) out[k].push_back(j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PointCloud

PointCloud PointCloud::from_points(Domain2D domain, std::vector<Vec2> positions,
                                   std::vector<Region> regions, double spacing) {
  domain.validate();
  if (positions.size() != regions.size())
    throw GeometryError("positions and regions differ in length");
  if (!(domain.collar > 0.0)) throw GeometryError("horizon must be positive");
  if (positions.size() >= std::numeric_limits<std::int32_t>::max())
    throw GeometryError("too many particles");

  PointCloud cloud;
  cloud.domain_ = std::move(domain);
  cloud.positions_ = std::move(positions);
  cloud.regions_ = std::move(regions);
  cloud.spacing_ = spacing;
  cloud.slot_.assign(cloud.positions_.size(), -1);
  for (std::uint32_t p = 0; p < cloud.positions_.size(); ++p) {
    if (cloud.regions_[p] == Region::interior) {
      cloud.slot_[p] = static_cast<std::int32_t>(cloud.interior_.size());
      cloud.interior_.push_back(p);
    } else {
      cloud.boundary_.push_back(p);
    }
  }
  if (cloud.interior_.empty()) throw GeometryError("point cloud has no interior particles");

  const double delta = cloud.domain_.collar;
  const CellGrid grid(cloud.positions_, delta);
  cloud.stencil_offsets_.reserve(cloud.interior_.size() + 1);
  cloud.stencil_offsets_.push_back(0);
  std::vector<std::uint32_t> nbrs;
  for (const std::uint32_t p : cloud.interior_) {
    grid.neighbors(cloud.positions_[p], delta, nbrs, p);
    for (const std::uint32_t j : nbrs) {
      // Coincident particles would make the kernel blow up; treat as a bad cloud.
      if (cloud.positions_[j] == cloud.positions_[p])
        throw GeometryError("coincident particles " + std::to_string(p) + " and " + std::to_string(j));
    }
    cloud.stencil_indices_.insert(cloud.stencil_indices_.end(), nbrs.begin(), nbrs.end());
    cloud.stencil_offsets_.push_back(static_cast<std::uint32_t>(cloud.stencil_indices_.size()));
  }
  cloud.separation_ = separation_distance(cloud.positions_);
  return cloud;
}

void PointCloud::write_csv(std::ostream& os) const {
  os << "id,x,y,region\n";
  for (std::size_t p = 0; p < positions_.size(); ++p) {
    os << p << ',' << fmt_double(positions_[p].x) << ',' << fmt_double(positions_[p].y) << ','
       << to_string(regions_[p]) << '\n';
  }
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PointCloud build_perturbed_lattice(const Domain2D& domain, const LatticeSpec& spec, double M) {
  domain.validate();
  spec.validate();
  if (!(M > 0.0) || !std::isfinite(M)) throw GeometryError("horizon ratio M must be positive");

  const double hx = (domain.upper.x - domain.lower.x) / (spec.nx - 1);
  const double hy = (domain.upper.y - domain.lower.y) / (spec.ny - 1);
  const double h = std::max(hx, hy);
  const double delta = M * h;
  const double amp = spec.perturbation * h;
  const int layers = static_cast<int>(std::ceil(M));

  Domain2D resolved = domain;
  resolved.collar = delta;

  std::mt19937_64 rng(spec.seed);
  std::vector<Vec2> positions;
  std::vector<Region> regions;
  for (int j = -layers; j <= spec.ny - 1 + layers; ++j) {
    for (int i = -layers; i <= spec.nx - 1 + layers; ++i) {
      const double dx = (2.0 * unit_uniform(rng) - 1.0) * amp;
      const double dy = (2.0 * unit_uniform(rng) - 1.0) * amp;
      const Vec2 p{domain.lower.x + i * hx + dx, domain.lower.y + j * hy + dy};
      if (!resolved.in_extended(p)) continue;
      positions.push_back(p);
      regions.push_back(resolved.contains(p) ? Region::interior : Region::boundary);
    }
  }
  return PointCloud::from_points(std::move(resolved), std::move(positions), std::move(regions), h);
}

// ---------------------------------------------------------------------------
// Predicates and resolution metrics

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

// c collinear with ab: is it inside the bounding box of ab?
bool within_box(Vec2 a, Vec2 b, Vec2 c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
         c.y <= std::max(a.y, b.y);
}

}  // namespace

bool segment_intersects_bond(Vec2 p, Vec2 q, const Segment& seg) {
  if (p == q) return false;
  const int o1 = orientation(p, q, seg.a);
  const int o2 = orientation(p, q, seg.b);
  const int o3 = orientation(seg.a, seg.b, p);
  const int o4 = orientation(seg.a, seg.b, q);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && within_box(p, q, seg.a)) return true;
  if (o2 == 0 && within_box(p, q, seg.b)) return true;
  if (o3 == 0 && within_box(seg.a, seg.b, p)) return true;
  if (o4 == 0 && within_box(seg.a, seg.b, q)) return true;
  return false;
}

SampleRegion extended_region(const Domain2D& domain) {
  const double d = domain.collar;
  return {{domain.lower.x - d, domain.lower.y - d},
          {domain.upper.x + d, domain.upper.y + d},
          [domain](Vec2 p) { return domain.in_extended(p); }};
}

double fill_distance(std::span<const Vec2> points, const SampleRegion& region, double probe) {
  if (!(probe > 0.0)) throw GeometryError("probe resolution must be positive");
  if (points.empty()) return std::numeric_limits<double>::infinity();
  const double area = std::max((region.upper.x - region.lower.x) * (region.upper.y - region.lower.y),
                               std::numeric_limits<double>::min());
  double cell = std::sqrt(area / static_cast<double>(points.size()));
  if (!(cell > 0.0)) cell = 1.0;
  const CellGrid grid(points, cell);
  double worst = 0.0;
  const auto nx = static_cast<std::int64_t>(std::floor((region.upper.x - region.lower.x) / probe));
  const auto ny = static_cast<std::int64_t>(std::floor((region.upper.y - region.lower.y) / probe));
  for (std::int64_t j = 0; j <= ny; ++j) {
    for (std::int64_t i = 0; i <= nx; ++i) {
      const Vec2 x{region.lower.x + static_cast<double>(i) * probe,
                   region.lower.y + static_cast<double>(j) * probe};
      if (!region.contains(x)) continue;
      worst = std::max(worst, grid.nearest_distance(x));
    }
  }
  return worst;
}

double fill_distance(const PointCloud& cloud, double probe) {
  return fill_distance(cloud.positions(), extended_region(cloud.domain()), probe);
}

double separation_distance(std::span<const Vec2> points) {
  if (points.size() < 2) return std::numeric_limits<double>::infinity();
  Vec2 lo = points[0], hi = points[0];
  for (const Vec2& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double area = std::max((hi.x - lo.x) * (hi.y - lo.y), 1e-300);
  const double cell = std::max(std::sqrt(area / static_cast<double>(points.size())),
                               std::max(hi.x - lo.x, hi.y - lo.y) * 1e-6);
  const CellGrid grid(points, cell);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> nbrs;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    grid.neighbors(points[i], cell, nbrs, i);
    for (const std::uint32_t j : nbrs) best = std::min(best, norm(points[j] - points[i]));
  }
  if (!std::isfinite(best)) {
    // Sparse cloud: no pair within one cell; fall back to all pairs.
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, norm(points[j] - points[i]));
  }
  return 0.5 * best;
}

}  // namespace pdq
