#pragma once

// Dense kernel shared by every other module. All routines take Eigen
// expressions and evaluate them once; results are plain dense objects.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "woven/error.hpp"

namespace woven {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative symmetry tolerance accepted by sym_eig before symmetrizing.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Smallest admissible lambda_min / lambda_max for solve_spd.
inline constexpr double kSpdTolerance = 1e-12;

/// Smallest admissible sigma_min / sigma_max for an operator to count as invertible.
inline constexpr double kInvertibleTolerance = 1e-12;

/// Eigenvalues ascending, eigenvectors as orthonormal columns in matching order.
template <typename Scalar>
struct Spectrum {
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> eigenvectors;

  Scalar min() const { return eigenvalues(0); }
  Scalar max() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Thin SVD: M = U * diag(singular_values) * V^T, singular values descending.
template <typename Scalar>
struct SingularDecomposition {
  Matrix<Scalar> left;
  Vector<Scalar> singular_values;
  Matrix<Scalar> right;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

template <typename Derived>
Spectrum<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = m;
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::NonSquare, "sym_eig expects a non-empty square matrix, got " +
                                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (!all_finite(a)) throw Error(ErrorCode::DidNotConverge, "sym_eig input has non-finite entries");
  const Scalar scale = a.norm();
  if ((a - a.transpose()).norm() > Scalar(kSymmetryTolerance) * scale) {
    throw Error(ErrorCode::NotSymmetric, "sym_eig input is not symmetric");
  }
  const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DidNotConverge, "symmetric eigensolver hit its iteration cap");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Eigenvalues only; same checks as sym_eig.
template <typename Derived>
Vector<typename Derived::Scalar> sym_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = m;
  if (a.rows() != a.cols() || a.rows() == 0) throw Error(ErrorCode::NonSquare, "sym_eigenvalues");
  if (!all_finite(a)) throw Error(ErrorCode::DidNotConverge, "sym_eigenvalues input has non-finite entries");
  if ((a - a.transpose()).norm() > Scalar(kSymmetryTolerance) * a.norm()) {
    throw Error(ErrorCode::NotSymmetric, "sym_eigenvalues input is not symmetric");
  }
  const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::DidNotConverge, "sym_eigenvalues");
  return solver.eigenvalues();
}

template <typename Derived>
SingularDecomposition<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = m;
  if (!all_finite(a)) throw Error(ErrorCode::DidNotConverge, "svd input has non-finite entries");
  Eigen::JacobiSVD<Matrix<Scalar>> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

template <typename Derived>
Vector<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = m;
  if (!all_finite(a)) throw Error(ErrorCode::DidNotConverge, "singular_values input has non-finite entries");
  Eigen::JacobiSVD<Matrix<Scalar>> solver(a);
  return solver.singularValues();
}

/// Spectral norm (largest singular value).
template <typename Derived>
typename Derived::Scalar op_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  return singular_values(m)(0);
}

template <typename Derived, typename RhsDerived>
Matrix<typename Derived::Scalar> solve_spd(const Eigen::MatrixBase<Derived>& m,
                                           const Eigen::MatrixBase<RhsDerived>& rhs) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> a = m;
  if (rhs.rows() != a.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_spd right-hand side has the wrong row count");
  }
  const auto eigenvalues = sym_eigenvalues(a);
  const Scalar top = eigenvalues(eigenvalues.size() - 1);
  if (!(top > Scalar(0)) || !(eigenvalues(0) > Scalar(kSpdTolerance) * top)) {
    throw Error(ErrorCode::NotPositiveDefinite, "operator is not positive definite");
  }
  Eigen::LLT<Matrix<Scalar>> llt((a + a.transpose()) / Scalar(2));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  }
  return llt.solve(rhs.derived());
}

/// Number of singular values above relative_tolerance * sigma_max.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar relative_tolerance) {
  if (m.size() == 0) return 0;
  const auto sv = singular_values(m);
  if (!(sv(0) > 0)) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > relative_tolerance * sv(0)) ++rank;
  }
  return rank;
}

/// Orthonormal basis (as columns) of the column span of m.
template <typename Derived>
Matrix<typename Derived::Scalar> orthonormal_basis(const Eigen::MatrixBase<Derived>& m,
                                                   typename Derived::Scalar relative_tolerance) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Matrix<Scalar>(m.rows(), 0);
  const auto dec = svd(m);
  Eigen::Index rank = 0;
  if (dec.singular_values.size() > 0 && dec.singular_values(0) > 0) {
    for (Eigen::Index i = 0; i < dec.singular_values.size(); ++i) {
      if (dec.singular_values(i) > relative_tolerance * dec.singular_values(0)) ++rank;
    }
  }
  return dec.left.leftCols(rank);
}

/// Smallest singular value over largest; zero for the zero matrix.
template <typename Derived>
typename Derived::Scalar inverse_condition(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const auto sv = singular_values(m);
  if (sv.size() == 0 || !(sv(0) > 0)) return Scalar(0);
  return sv(sv.size() - 1) / sv(0);
}

template <typename Derived>
bool is_invertible(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return m.rows() == m.cols() && inverse_condition(m) > Scalar(kInvertibleTolerance);
}

}  // namespace woven
