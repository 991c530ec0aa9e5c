#include <doctest.h>

#include <random>
#include <vector>

#include "pdquad/simd.hpp"

using namespace pdq;
using namespace pdq::simd;

namespace {

struct Bonds {
  std::vector<double> xi_x, xi_y, du_x, du_y, w;
  explicit Bonds(std::size_t n, std::uint64_t seed) : xi_x(n), xi_y(n), du_x(n), du_y(n), w(n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 2.0);
    for (std::size_t k = 0; k < n; ++k) {
      // Keep |xi| away from zero.
      do {
        xi_x[k] = u(rng);
        xi_y[k] = u(rng);
      } while (xi_x[k] * xi_x[k] + xi_y[k] * xi_y[k] < 0.01);
      du_x[k] = 1e-2 * u(rng);
      du_y[k] = 1e-2 * u(rng);
      w[k] = pos(rng);
    }
  }
  BondBatch batch() const { return {xi_x.data(), xi_y.data(), du_x.data(), du_y.data(), w.data(), w.size()}; }
};

}  // namespace

TEST_CASE("runtime selection") {
  CHECK(supported(Isa::scalar));
  CHECK(kernels_for(Isa::scalar).isa == Isa::scalar);
  const KernelTable& best = kernels();
  CHECK((best.isa == Isa::scalar || supported(best.isa)));
  CHECK(to_string(Isa::avx2) == "avx2");
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!supported(Isa::avx2)) {
    MESSAGE("CPU lacks AVX2; equivalence not exercised");
    return;
  }
  const KernelTable& a = kernels_for(Isa::avx2);
  const KernelTable& s = kernels_for(Isa::scalar);

  // Sizes cover the vector body, the scalar tail and the empty case.
  for (const std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 203u}) {
    const Bonds b(n, 100 + n);
    CAPTURE(n);

    double fx_s = 0, fy_s = 0, fx_a = 0, fy_a = 0;
    s.bond_force_sum(b.batch(), 3.0, &fx_s, &fy_s);
    a.bond_force_sum(b.batch(), 3.0, &fx_a, &fy_a);
    double mag = 0.0;
    for (std::size_t k = 0; k < n; ++k) mag += 3.0 * b.w[k] * 0.02 / std::hypot(b.xi_x[k], b.xi_y[k]);
    CHECK(std::abs(fx_s - fx_a) <= 1e-14 * (mag + 1e-300));
    CHECK(std::abs(fy_s - fy_a) <= 1e-14 * (mag + 1e-300));

    std::vector<double> sxx(n), sxy(n), syy(n), axx(n), axy(n), ayy(n);
    s.bond_blocks(b.xi_x.data(), b.xi_y.data(), b.w.data(), n, 3.0, sxx.data(), sxy.data(), syy.data());
    a.bond_blocks(b.xi_x.data(), b.xi_y.data(), b.w.data(), n, 3.0, axx.data(), axy.data(), ayy.data());
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(axx[k] == doctest::Approx(sxx[k]).epsilon(1e-15));
      CHECK(axy[k] == doctest::Approx(sxy[k]).epsilon(1e-15));
      CHECK(ayy[k] == doctest::Approx(syy[k]).epsilon(1e-15));
    }

    std::vector<double> ss(n), as(n);
    s.bond_strains(b.xi_x.data(), b.xi_y.data(), b.du_x.data(), b.du_y.data(), n, ss.data());
    a.bond_strains(b.xi_x.data(), b.xi_y.data(), b.du_x.data(), b.du_y.data(), n, as.data());
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(as[k] - ss[k]) <= 1e-15);
  }
}

TEST_CASE("avx2 spmv agrees with the scalar reference") {
  if (!supported(Isa::avx2)) return;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(0, 13);
  const std::int64_t rows = 300, cols = 280;
  std::vector<int> outer{0}, inner;
  std::vector<double> values;
  for (std::int64_t r = 0; r < rows; ++r) {
    const int m = len(rng);
    for (int k = 0; k < m; ++k) {
      inner.push_back(static_cast<int>((r * 7 + k * 13) % cols));
      values.push_back(u(rng));
    }
    outer.push_back(static_cast<int>(inner.size()));
  }
  std::vector<double> x(cols);
  for (auto& v : x) v = u(rng);
  const CsrView a{rows, outer.data(), inner.data(), values.data()};
  std::vector<double> ys(rows), ya(rows);
  kernels_for(Isa::scalar).spmv(a, x.data(), ys.data());
  kernels_for(Isa::avx2).spmv(a, x.data(), ya.data());
  for (std::int64_t r = 0; r < rows; ++r) {
    double mag = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) mag += std::abs(values[k] * x[inner[k]]);
    CHECK(std::abs(ya[r] - ys[r]) <= 1e-15 * mag);
  }
}
