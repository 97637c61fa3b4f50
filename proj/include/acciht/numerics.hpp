#pragma once

// Dense kernels shared by the models, objectives, solvers and analysis.
// Everything is desk-scale and dense; Eigen supplies storage and the
// factorizations.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "acciht/errors.hpp"

namespace acciht {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDirectTol = 1e-10;
inline constexpr double kIterativeTol = 1e-8;

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

struct ExtremeEigs {
  double lambda_min;
  double lambda_max;
};

/// Smallest and largest eigenvalue of a symmetric matrix. `tol` bounds the
/// allowed asymmetry relative to the largest entry.
inline ExtremeEigs extreme_eigs_sym(const Matrix& m, double tol = kIterativeTol) {
  detail::require(m.rows() >= 1 && m.rows() == m.cols(),
                  "extreme_eigs_sym: matrix must be square and non-empty");
  detail::require(all_finite(m), "extreme_eigs_sym: non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  detail::require((m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale,
                  "extreme_eigs_sym: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("extreme_eigs_sym: eigensolver failed");
  const auto& ev = es.eigenvalues();  // ascending
  return {ev(0), ev(ev.size() - 1)};
}

/// Largest eigenvalue of the Gram matrix PhiᵀPhi, i.e. the squared spectral
/// norm of Phi.
inline double gram_lambda_max(const Matrix& phi) {
  if (phi.size() == 0) return 0.0;
  const Matrix gram = phi.rows() < phi.cols() ? Matrix(phi * phi.transpose())
                                              : Matrix(phi.transpose() * phi);
  return extreme_eigs_sym(gram).lambda_max;
}

struct TruncatedSvd {
  Matrix U;  // rows x r, orthonormal columns
  Vector S;  // r singular values, descending
  Matrix V;  // cols x r, orthonormal columns

  Matrix reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

/// Best rank-r approximation factors of `m` (Eckart–Young).
inline TruncatedSvd truncated_svd(const Matrix& m, Index r) {
  detail::require(r >= 1 && r <= std::min(m.rows(), m.cols()),
                  "truncated_svd: rank " + std::to_string(r) + " out of range");
  detail::require(all_finite(m), "truncated_svd: non-finite entries");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
}

/// Orthonormal basis for the column span of `m`; columns whose pivoted QR
/// diagonal falls below `rel_tol` times the largest are dropped.
inline Matrix orthonormal_basis(const Matrix& m, double rel_tol = 1e-10) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(rel_tol);
  const Index rank = qr.rank();
  const Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), rank);
  return q;
}

/// Least-squares fit of `b` using only the columns of `phi` listed in
/// `support`. The result is a full-length vector, zero off the support.
/// Throws NumericalError when the selected columns are linearly dependent.
inline Vector solve_restricted_ls(const Matrix& phi, const Vector& b,
                                  std::span<const Index> support) {
  detail::require(phi.rows() == b.size(), "solve_restricted_ls: dimension mismatch");
  Vector x = Vector::Zero(phi.cols());
  if (support.empty()) return x;
  Matrix sub(phi.rows(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    detail::require(support[j] >= 0 && support[j] < phi.cols(),
                    "solve_restricted_ls: support index out of range");
    sub.col(static_cast<Index>(j)) = phi.col(support[j]);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  qr.setThreshold(kDirectTol);
  if (qr.rank() < sub.cols())
    throw NumericalError("solve_restricted_ls: restricted submatrix is rank deficient");
  const Vector coef = qr.solve(b);
  for (std::size_t j = 0; j < support.size(); ++j) x(support[j]) = coef(static_cast<Index>(j));
  return x;
}

} // namespace acciht
