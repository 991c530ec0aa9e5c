#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdq {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Segment {
  Vec2 a;
  Vec2 b;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned rectangle Omega together with its volumetric collar of
/// thickness `collar` and any crack or traction-free line segments.
struct Domain2D {
  Vec2 lower;
  Vec2 upper;
  double collar = 0.0;
  std::vector<Segment> cracks;
  std::vector<Segment> free_surfaces;

  void validate() const;
  /// Closed rectangle test.
  bool contains(Vec2 p) const;
  /// Euclidean distance from p to the closed rectangle (0 inside).
  double distance_to(Vec2 p) const;
  /// p in Omega^delta = Omega plus its collar.
  bool in_extended(Vec2 p) const { return distance_to(p) <= collar; }
};

struct LatticeSpec {
  int nx = 0;
  int ny = 0;
  double perturbation = 0.1;  // fraction of the lattice spacing
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Region : std::uint8_t { interior, boundary };

std::string_view to_string(Region r);

/// Particles covering Omega^delta with interior/boundary partition and
/// fixed-radius stencils for the interior particles.
///
/// Stencils are stored in CSR form indexed by interior ordinal k (the
/// position of the particle in `interior`), not by particle id.
class PointCloud {
 public:
  PointCloud() = default;

  /// Builds a cloud from explicit positions; stencils are found with the
  /// cell-list search.
  static PointCloud from_points(Domain2D domain, std::vector<Vec2> positions,
                                std::vector<Region> regions, double spacing);

  std::size_t size() const { return positions_.size(); }
  std::span<const Vec2> positions() const { return positions_; }
  Vec2 position(std::size_t p) const { return positions_[p]; }
  Region region(std::size_t p) const { return regions_[p]; }
  std::span<const std::uint32_t> interior() const { return interior_; }
  std::span<const std::uint32_t> boundary() const { return boundary_; }
  /// Interior ordinal of particle p, or -1 for boundary particles.
  std::int32_t interior_slot(std::size_t p) const { return slot_[p]; }

  const Domain2D& domain() const { return domain_; }
  double spacing() const { return spacing_; }
  double horizon() const { return domain_.collar; }
  /// Separation distance q: half the minimal pairwise distance.
  double separation() const { return separation_; }

  std::span<const std::uint32_t> stencil(std::size_t k) const {
    return {stencil_indices_.data() + stencil_offsets_[k],
            stencil_offsets_[k + 1] - stencil_offsets_[k]};
  }
  /// Offset of interior ordinal k's first bond within the flat stencil array.
  std::size_t stencil_offset(std::size_t k) const { return stencil_offsets_[k]; }
  std::span<const std::uint32_t> stencil_offsets() const { return stencil_offsets_; }
  std::span<const std::uint32_t> stencil_indices() const { return stencil_indices_; }
  std::size_t total_bonds() const { return stencil_indices_.size(); }

  void write_csv(std::ostream& os) const;

 private:
  Domain2D domain_;
  std::vector<Vec2> positions_;
  std::vector<Region> regions_;
  std::vector<std::uint32_t> interior_;
  std::vector<std::uint32_t> boundary_;
  std::vector<std::int32_t> slot_;
  std::vector<std::uint32_t> stencil_offsets_;
  std::vector<std::uint32_t> stencil_indices_;
  double spacing_ = 0.0;
  double separation_ = 0.0;
};

/// Uniform cell grid for fixed-radius queries.
class CellGrid {
 public:
  CellGrid(std::span<const Vec2> points, double cell_size);

  /// Indices j != self with |points[j] - p| <= radius, ascending.
  /// `radius` must not exceed the cell size.
  void neighbors(Vec2 p, double radius, std::vector<std::uint32_t>& out,
                 std::int64_t self = -1) const;
  /// Distance from p to the nearest stored point (searches outward ring by ring).
  double nearest_distance(Vec2 p) const;

 private:
  std::int64_t cell_of(double v, double lo, std::int64_t n) const;

  std::span<const Vec2> points_;
  double cell_ = 0.0;
  Vec2 lo_;
  std::int64_t nx_ = 0;
  std::int64_t ny_ = 0;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> sorted_;
};

/// O(N^2) reference neighbor search; used to check CellGrid.
std::vector<std::vector<std::uint32_t>> brute_force_neighbors(
    std::span<const Vec2> points, std::span<const std::uint32_t> centers, double radius);

/// Cartesian lattice on Omega (nx x ny points, endpoints included) extended by
/// ceil(M) layers, perturbed, and trimmed to Omega^delta with delta = M h.
PointCloud build_perturbed_lattice(const Domain2D& domain, const LatticeSpec& spec, double M);

/// Closed-segment intersection between bond pq and seg; touching and
/// collinear overlap count. A zero-length bond never intersects.
bool segment_intersects_bond(Vec2 p, Vec2 q, const Segment& seg);

/// Region over which the fill distance sup-min is sampled.
struct SampleRegion {
  Vec2 lower;  // bounding box
  Vec2 upper;
  std::function<bool(Vec2)> contains;
};

SampleRegion extended_region(const Domain2D& domain);

/// sup over probe points of the distance to the nearest particle. Probe points
/// lie on the grid lower + r (i, j), so halving r refines the sample set.
double fill_distance(std::span<const Vec2> points, const SampleRegion& region, double probe);
double fill_distance(const PointCloud& cloud, double probe);

double separation_distance(std::span<const Vec2> points);

}  // namespace pdq
