#include "pdquad/linalg.hpp"

#include <cmath>
#include <string>

namespace pdq {

DenseMatrix::DenseMatrix(Eigen::MatrixXd m) : m_(std::move(m)) { check_finite(); }

void DenseMatrix::set(Eigen::Index i, Eigen::Index j, double v) {
  if (!std::isfinite(v))
    throw LinalgError("non-finite matrix entry at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  m_(i, j) = v;
}

void DenseMatrix::check_finite() const {
  if (!m_.allFinite()) throw LinalgError("matrix contains non-finite entries");
}

MinNormSolution min_norm_solve(const DenseMatrix& B, std::span<const double> g, double rank_tol) {
  const auto& A = B.matrix();
  if (A.rows() < 1 || A.cols() < 1) throw LinalgError("min_norm_solve needs a non-empty matrix");
  if (static_cast<Eigen::Index>(g.size()) != A.rows()) throw LinalgError("right-hand side size mismatch");
  const Eigen::Map<const Eigen::VectorXd> rhs(g.data(), static_cast<Eigen::Index>(g.size()));

  MinNormSolution out;
  out.weights = Eigen::VectorXd::Zero(A.cols());
  if (A.cwiseAbs().maxCoeff() == 0.0) {
    const double r = rhs.cwiseAbs().maxCoeff();
    if (r > 0.0) throw InfeasibleSystem("constraint matrix is zero but the moments are not", r);
    return out;
  }

  // SVD of B^T (tall) so the Householder preconditioner reduces it to square.
  const Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      A.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double lambda_max = sigma(0) * sigma(0);
  // B^T = U S V^T  =>  B = V S U^T, S_schur = V S^2 V^T, w = U S^-1 V^T g.
  const Eigen::VectorXd proj = svd.matrixV().transpose() * rhs;
  double lambda_min = lambda_max;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double lambda = sigma(i) * sigma(i);
    if (!(lambda > rank_tol * lambda_max)) break;
    out.weights.noalias() += svd.matrixU().col(i) * (proj(i) / sigma(i));
    lambda_min = lambda;
    ++out.rank;
  }
  out.condition = lambda_max / lambda_min;
  return out;
}

double residual_inf_norm(const DenseMatrix& B, std::span<const double> w, std::span<const double> g) {
  const auto& A = B.matrix();
  if (static_cast<Eigen::Index>(w.size()) != A.cols() || static_cast<Eigen::Index>(g.size()) != A.rows())
    throw LinalgError("residual shape mismatch");
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), A.cols());
  const Eigen::Map<const Eigen::VectorXd> gv(g.data(), A.rows());
  return (A * wv - gv).cwiseAbs().maxCoeff();
}

}  // namespace pdq
