#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>

namespace pdq {

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the constraint matrix is identically zero but the right-hand
/// side is not.
class InfeasibleSystem : public LinalgError {
 public:
  InfeasibleSystem(const std::string& what, double residual)
      : LinalgError(what), residual_norm(residual) {}
  double residual_norm;
};

/// Dense matrix that refuses non-finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Eigen::Index rows, Eigen::Index cols) : m_(Eigen::MatrixXd::Zero(rows, cols)) {}
  explicit DenseMatrix(Eigen::MatrixXd m);

  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  void set(Eigen::Index i, Eigen::Index j, double v);
  const Eigen::MatrixXd& matrix() const { return m_; }

  /// Unchecked write access for hot loops; call `check_finite` afterwards.
  Eigen::MatrixXd& raw() { return m_; }
  void check_finite() const;

 private:
  Eigen::MatrixXd m_;
};

struct MinNormSolution {
  Eigen::VectorXd weights;
  int rank = 0;
  /// lambda_max / lambda_min over the retained spectrum of S = B B^T.
  double condition = 0.0;
};

/// Minimal-norm weights w = B^T S^+ g with S = B B^T. Eigenvalues of S below
/// rank_tol * lambda_max are dropped. S is never formed: its eigenpairs come
/// from the SVD of B (lambda_i = sigma_i^2), which keeps the solve accurate
/// when B itself is moderately ill-conditioned.
MinNormSolution min_norm_solve(const DenseMatrix& B, std::span<const double> g, double rank_tol = 1e-10);

/// || B w - g ||_inf
double residual_inf_norm(const DenseMatrix& B, std::span<const double> w, std::span<const double> g);

}  // namespace pdq
