#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pdquad/linalg.hpp"

using namespace pdq;

namespace {

Eigen::MatrixXd random_matrix(int m, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a;
}

// Oracle: the KKT system [I B^T; B 0] [w; l] = [0; g] by full-pivot LU.
Eigen::VectorXd saddle_weights(const Eigen::MatrixXd& b, const Eigen::VectorXd& g) {
  const Eigen::Index m = b.rows(), n = b.cols();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + m, n + m);
  k.topLeftCorner(n, n).setIdentity();
  k.topRightCorner(n, m) = b.transpose();
  k.bottomLeftCorner(m, n) = b;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.tail(m) = g;
  return k.fullPivLu().solve(rhs).head(n);
}

}  // namespace

TEST_CASE("min-norm weights equal the saddle-point solution") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 3 + trial % 10;
    const int n = m + 5 + trial % 17;
    const Eigen::MatrixXd b = random_matrix(m, n, rng);
    const Eigen::VectorXd g = random_matrix(m, 1, rng);
    const MinNormSolution s = min_norm_solve(DenseMatrix(b), std::span<const double>(g.data(), m));
    CHECK(s.rank == m);
    CHECK((s.weights - saddle_weights(b, g)).lpNorm<Eigen::Infinity>() < 1e-11);
    CHECK(residual_inf_norm(DenseMatrix(b), std::span<const double>(s.weights.data(), n),
                            std::span<const double>(g.data(), m)) < 1e-12);
  }
}

TEST_CASE("rank-deficient systems give the pseudoinverse solution") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 8, n = 20, r = 5;
    const Eigen::MatrixXd b = random_matrix(m, r, rng) * random_matrix(r, n, rng);
    const Eigen::VectorXd g = random_matrix(m, 1, rng);
    const MinNormSolution s = min_norm_solve(DenseMatrix(b), std::span<const double>(g.data(), m));
    CHECK(s.rank == r);

    const Eigen::MatrixXd pinv = b.completeOrthogonalDecomposition().pseudoInverse();
    CHECK((s.weights - pinv * g).norm() < 1e-10 * (pinv * g).norm());

    // Moore-Penrose characterization: w lies in range(B^T) and B w is the
    // orthogonal projection of g onto range(B).
    const Eigen::MatrixXd proj_row = pinv * b;
    CHECK((proj_row * s.weights - s.weights).norm() < 1e-10 * s.weights.norm());
    const Eigen::VectorXd resid = b * s.weights - g;
    CHECK((b.transpose() * resid).norm() < 1e-9 * b.norm() * g.norm());
  }
}

TEST_CASE("condition reports the spectrum of B B^T") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 3);
  b(0, 0) = 2.0;
  b(1, 1) = 0.5;
  const std::vector<double> g{1.0, 1.0};
  const MinNormSolution s = min_norm_solve(DenseMatrix(b), g);
  CHECK(s.condition == doctest::Approx(16.0));
  CHECK(s.weights(0) == doctest::Approx(0.5));
  CHECK(s.weights(1) == doctest::Approx(2.0));
  CHECK(s.weights(2) == 0.0);
}

TEST_CASE("zero matrix with nonzero data is infeasible") {
  const DenseMatrix b(3, 4);
  const std::vector<double> g{0.0, 1.0, 0.0};
  CHECK_THROWS_AS(min_norm_solve(b, g), InfeasibleSystem);
  const std::vector<double> zero(3, 0.0);
  CHECK(min_norm_solve(b, zero).weights.isZero());
}

TEST_CASE("non-finite entries are refused") {
  DenseMatrix b(2, 2);
  CHECK_THROWS_AS(b.set(0, 0, std::numeric_limits<double>::quiet_NaN()), LinalgError);
  CHECK_THROWS_AS(b.set(1, 0, std::numeric_limits<double>::infinity()), LinalgError);
  b.raw()(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(b.check_finite(), LinalgError);
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(DenseMatrix{m}, LinalgError);
}
