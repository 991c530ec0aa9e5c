#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>

#include "pdquad/geometry.hpp"

using namespace pdq;

namespace {

std::vector<Vec2> random_points(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec2> p(n);
  for (auto& v : p) v = {u(rng), u(rng)};
  return p;
}

// Orientation sign with 64-bit integers: exact for small integer coordinates.
int orient(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by, std::int64_t cx, std::int64_t cy) {
  const std::int64_t d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return (d > 0) - (d < 0);
}

bool on_segment(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by, std::int64_t px, std::int64_t py) {
  return std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py && py <= std::max(ay, by);
}

bool exact_intersect(std::array<std::int64_t, 8> c) {
  auto [px, py, qx, qy, ax, ay, bx, by] = c;
  if (px == qx && py == qy) return false;
  const int o1 = orient(px, py, qx, qy, ax, ay);
  const int o2 = orient(px, py, qx, qy, bx, by);
  const int o3 = orient(ax, ay, bx, by, px, py);
  const int o4 = orient(ax, ay, bx, by, qx, qy);
  if (o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0) return true;
  if (o1 == 0 && on_segment(px, py, qx, qy, ax, ay)) return true;
  if (o2 == 0 && on_segment(px, py, qx, qy, bx, by)) return true;
  if (o3 == 0 && on_segment(ax, ay, bx, by, px, py)) return true;
  if (o4 == 0 && on_segment(ax, ay, bx, by, qx, qy)) return true;
  return false;
}

}  // namespace

TEST_CASE("cell grid matches brute-force neighbor search") {
  const auto pts = random_points(1500, 11);
  std::vector<std::uint32_t> centers(pts.size());
  for (std::uint32_t i = 0; i < centers.size(); ++i) centers[i] = i;
  for (const double radius : {0.01, 0.037, 0.08}) {
    CellGrid grid(pts, radius);
    const auto expected = brute_force_neighbors(pts, centers, radius);
    std::vector<std::uint32_t> got;
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      grid.neighbors(pts[i], radius, got, i);
      REQUIRE(got == expected[i]);
    }
  }
}

TEST_CASE("nearest distance agrees with a linear scan") {
  const auto pts = random_points(400, 5);
  CellGrid grid(pts, 0.05);
  for (const Vec2 probe : random_points(200, 6, -0.3, 1.3)) {
    double best = 1e300;
    for (const Vec2 p : pts) best = std::min(best, norm(p - probe));
    CHECK(grid.nearest_distance(probe) == doctest::Approx(best).epsilon(1e-15));
  }
}

TEST_CASE("segment test agrees with exact integer orientation") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coord(-4, 4);
  int hits = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    std::array<std::int64_t, 8> c{};
    for (auto& v : c) v = coord(rng);
    const Vec2 p{double(c[0]), double(c[1])}, q{double(c[2]), double(c[3])};
    const Segment s{{double(c[4]), double(c[5])}, {double(c[6]), double(c[7])}};
    const bool want = exact_intersect(c);
    hits += want;
    INFO("bond (" << c[0] << "," << c[1] << ")-(" << c[2] << "," << c[3] << ") seg (" << c[4] << "," << c[5]
                  << ")-(" << c[6] << "," << c[7] << ")");
    REQUIRE(segment_intersects_bond(p, q, s) == want);
  }
  CHECK(hits > 1000);
}

TEST_CASE("segment test edge cases") {
  const Segment s{{0.0, -1.0}, {0.0, 1.0}};
  CHECK(segment_intersects_bond({-1.0, 0.0}, {1.0, 0.0}, s));
  CHECK(segment_intersects_bond({0.0, 1.0}, {1.0, 1.0}, s));   // touches the end
  CHECK(segment_intersects_bond({0.0, 0.5}, {0.0, 3.0}, s));   // collinear overlap
  CHECK_FALSE(segment_intersects_bond({0.0, 1.5}, {0.0, 3.0}, s));
  CHECK_FALSE(segment_intersects_bond({0.5, 0.5}, {0.5, 0.5}, s));
  CHECK_FALSE(segment_intersects_bond({0.1, -2.0}, {0.1, 2.0}, s));
}

TEST_CASE("perturbed lattice") {
  Domain2D d{.lower = {-1.0, -1.0}, .upper = {1.0, 1.0}};
  const int n = 21;
  const double h = 2.0 / (n - 1);
  d.collar = 3.5 * h;
  const LatticeSpec spec{.nx = n, .ny = n, .perturbation = 0.1, .seed = 9};
  const PointCloud cloud = build_perturbed_lattice(d, spec, 3.5);

  SUBCASE("partition and stencils") {
    CHECK(cloud.interior().size() + cloud.boundary().size() == cloud.size());
    std::size_t interior = 0;
    for (std::size_t p = 0; p < cloud.size(); ++p) {
      const Vec2 x = cloud.position(p);
      CHECK(d.in_extended(x));
      const bool inside = d.contains(x);
      CHECK((cloud.region(p) == Region::interior) == inside);
      CHECK((cloud.interior_slot(p) >= 0) == inside);
      interior += inside;
    }
    CHECK(interior == cloud.interior().size());

    const auto expected = brute_force_neighbors(cloud.positions(), cloud.interior(), cloud.horizon());
    for (std::size_t k = 0; k < cloud.interior().size(); ++k) {
      const auto s = cloud.stencil(k);
      REQUIRE(std::vector<std::uint32_t>(s.begin(), s.end()) == expected[k]);
    }
  }

  SUBCASE("perturbation bound and separation") {
    double min_d = 1e300;
    const auto pos = cloud.positions();
    for (std::size_t i = 0; i < pos.size(); ++i)
      for (std::size_t j = i + 1; j < pos.size(); ++j) min_d = std::min(min_d, norm(pos[i] - pos[j]));
    CHECK(cloud.separation() == doctest::Approx(0.5 * min_d).epsilon(1e-14));
    CHECK(separation_distance(pos) == doctest::Approx(0.5 * min_d).epsilon(1e-14));
    // Two points moved by at most 0.1 h each along each axis.
    CHECK(min_d >= h * (1.0 - 0.2 * std::sqrt(2.0)) - 1e-15);
  }

  SUBCASE("same seed, same cloud") {
    const PointCloud again = build_perturbed_lattice(d, spec, 3.5);
    REQUIRE(again.size() == cloud.size());
    CHECK(std::equal(cloud.positions().begin(), cloud.positions().end(), again.positions().begin()));
    LatticeSpec other = spec;
    other.seed = 10;
    const PointCloud moved = build_perturbed_lattice(d, other, 3.5);
    CHECK_FALSE(std::equal(cloud.positions().begin(), cloud.positions().end(), moved.positions().begin()));
  }

  SUBCASE("fill distance is bounded by the perturbed spacing") {
    // Inside the rectangle every probe has a lattice cell around it.
    const SampleRegion inner{d.lower, d.upper, [&](Vec2 p) { return d.contains(p); }};
    const double fi = fill_distance(cloud.positions(), inner, h / 8.0);
    CHECK(fi > 0.0);
    CHECK(fi <= h * (std::sqrt(0.5) + 0.1 * std::sqrt(2.0)));
    // The rounded collar corners are trimmed, so probes there can be a full spacing away.
    const double fe = fill_distance(cloud, h / 8.0);
    CHECK(fe >= fi);
    CHECK(fe <= h * (1.0 + 0.1 * std::sqrt(2.0)));
  }

  SUBCASE("csv") {
    std::ostringstream os;
    cloud.write_csv(os);
    const std::string s = os.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(cloud.size() + 1));
  }
}

TEST_CASE("invalid inputs are rejected") {
  Domain2D bad{.lower = {1.0, 0.0}, .upper = {0.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), GeometryError);
  LatticeSpec s{.nx = 1, .ny = 4};
  CHECK_THROWS_AS(s.validate(), GeometryError);
  s = {.nx = 4, .ny = 4, .perturbation = 0.6};
  CHECK_THROWS_AS(s.validate(), GeometryError);
}
