#pragma once

// Weighted finite families standing in for continuous frames over a measure
// space. Every integral over the index space is the weighted sum over atoms.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "woven/error.hpp"
#include "woven/linalg.hpp"

namespace woven {

/// lambda_min(S) must exceed this multiple of lambda_max(S) for a frame.
inline constexpr double kFrameTolerance = 1e-10;

/// Operator-norm tolerance on the reconstruction identity of a dual pair.
inline constexpr double kDualTolerance = 1e-8;

/// Relative tolerance on singular values used by null-space and span tests.
/// Singular values are square roots of frame-operator eigenvalues, hence the root.
inline const double kSpanTolerance = std::sqrt(kFrameTolerance);

/// Atoms are stored as the columns of a dim x n matrix; immutable once built.
template <typename Scalar>
class DiscretizedFrame {
 public:
  DiscretizedFrame(Matrix<Scalar> atoms, Vector<Scalar> weights, std::string label = {})
      : atoms_(std::move(atoms)), weights_(std::move(weights)), label_(std::move(label)) {
    if (atoms_.rows() < 1) throw Error(ErrorCode::InvalidFrame, "frame dimension must be at least 1");
    if (atoms_.cols() < 1) throw Error(ErrorCode::InvalidFrame, "frame needs at least one atom");
    if (weights_.size() != atoms_.cols()) {
      throw Error(ErrorCode::InvalidFrame, "weight count " + std::to_string(weights_.size()) +
                                               " does not match atom count " + std::to_string(atoms_.cols()));
    }
    if (!all_finite(atoms_)) throw Error(ErrorCode::InvalidFrame, "atoms must be finite");
    for (Eigen::Index k = 0; k < weights_.size(); ++k) {
      if (!std::isfinite(static_cast<double>(weights_(k))) || !(weights_(k) > Scalar(0))) {
        throw Error(ErrorCode::InvalidFrame, "weight " + std::to_string(k) + " must be positive and finite");
      }
    }
  }

  /// Unit weights.
  explicit DiscretizedFrame(Matrix<Scalar> atoms, std::string label = {})
      : DiscretizedFrame(atoms, Vector<Scalar>::Ones(atoms.cols()), std::move(label)) {}

  Eigen::Index dim() const { return atoms_.rows(); }
  Eigen::Index size() const { return atoms_.cols(); }
  const Matrix<Scalar>& atoms() const { return atoms_; }
  const Vector<Scalar>& weights() const { return weights_; }
  const std::string& label() const { return label_; }
  auto atom(Eigen::Index k) const { return atoms_.col(k); }

  /// Atoms scaled by sqrt(w_k): S = W W^T and the Gram operator is W^T W.
  Matrix<Scalar> weighted_atoms() const { return atoms_ * weights_.cwiseSqrt().asDiagonal(); }

  DiscretizedFrame with_atoms(Matrix<Scalar> atoms, std::string label) const {
    return DiscretizedFrame(std::move(atoms), weights_, std::move(label));
  }

 private:
  Matrix<Scalar> atoms_;
  Vector<Scalar> weights_;
  std::string label_;
};

template <typename Scalar>
struct FrameBounds {
  Scalar lower;
  Scalar upper;

  bool is_frame(double tolerance = kFrameTolerance) const {
    return upper > Scalar(0) && lower > Scalar(tolerance) * upper;
  }
};

template <typename Scalar>
struct DualCheck {
  bool is_dual;
  Scalar residual;
};

template <typename Scalar>
struct NullBesselFamily {
  DiscretizedFrame<Scalar> family;
  bool redundant;
  /// Coefficient vector c with v_k = c_k * direction.
  Vector<Scalar> coefficients;
  Vector<Scalar> direction;
};

template <typename Scalar>
Matrix<Scalar> frame_operator(const DiscretizedFrame<Scalar>& f) {
  const Matrix<Scalar> root = f.weighted_atoms();
  return root * root.transpose();
}

/// Frame operator of the atoms selected by `mask` (mask[k] true keeps atom k).
template <typename Scalar, typename Mask>
Matrix<Scalar> partial_frame_operator(const DiscretizedFrame<Scalar>& f, const Mask& mask) {
  Matrix<Scalar> s = Matrix<Scalar>::Zero(f.dim(), f.dim());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (mask[static_cast<std::size_t>(k)]) s.noalias() += f.weights()(k) * f.atom(k) * f.atom(k).transpose();
  }
  return s;
}

template <typename Scalar>
FrameBounds<Scalar> frame_bounds(const DiscretizedFrame<Scalar>& f) {
  const auto eigenvalues = sym_eigenvalues(frame_operator(f));
  return {std::max(eigenvalues(0), Scalar(0)), eigenvalues(eigenvalues.size() - 1)};
}

template <typename Scalar>
bool is_frame(const DiscretizedFrame<Scalar>& f) {
  return frame_bounds(f).is_frame();
}

template <typename Scalar, typename Derived>
Vector<Scalar> analysis(const DiscretizedFrame<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != f.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "analysis vector length " + std::to_string(x.size()) +
                                                  " != frame dimension " + std::to_string(f.dim()));
  }
  return f.atoms().transpose() * x;
}

template <typename Scalar, typename Derived>
Vector<Scalar> synthesis(const DiscretizedFrame<Scalar>& f, const Eigen::MatrixBase<Derived>& c) {
  if (c.size() != f.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient length " + std::to_string(c.size()) +
                                                  " != atom count " + std::to_string(f.size()));
  }
  return f.atoms() * (f.weights().array() * c.derived().array()).matrix();
}

/// Squared weighted L2 norm of a coefficient vector: sum_k w_k c_k^2.
template <typename Scalar, typename Derived>
Scalar weighted_norm_squared(const DiscretizedFrame<Scalar>& f, const Eigen::MatrixBase<Derived>& c) {
  return (f.weights().array() * c.derived().array().square()).sum();
}

/// Optimal Riesz constants: extreme eigenvalues of G_jk = sqrt(w_j w_k) <F_j, F_k>.
template <typename Scalar>
FrameBounds<Scalar> riesz_bounds(const DiscretizedFrame<Scalar>& f) {
  const Matrix<Scalar> root = f.weighted_atoms();
  const auto eigenvalues = sym_eigenvalues(Matrix<Scalar>(root.transpose() * root));
  return {std::max(eigenvalues(0), Scalar(0)), eigenvalues(eigenvalues.size() - 1)};
}

/// Positive Gram lower bound and full span.
template <typename Scalar>
bool is_riesz_basis(const DiscretizedFrame<Scalar>& f) {
  if (!riesz_bounds(f).is_frame()) return false;
  return numerical_rank(f.atoms(), Scalar(kSpanTolerance)) == f.dim();
}

template <typename Scalar>
DiscretizedFrame<Scalar> canonical_dual(const DiscretizedFrame<Scalar>& f) {
  const Matrix<Scalar> s = frame_operator(f);
  const auto eigenvalues = sym_eigenvalues(s);
  if (!FrameBounds<Scalar>{eigenvalues(0), eigenvalues(eigenvalues.size() - 1)}.is_frame()) {
    throw Error(ErrorCode::NotAFrame, "canonical dual requires a frame (lambda_min(S) too small)");
  }
  return f.with_atoms(solve_spd(s, f.atoms()), f.label().empty() ? "canonical dual" : f.label() + " canonical dual");
}

namespace detail {

template <typename Scalar>
bool same_weights(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  if (a.size() != b.size()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= Scalar(1e-12) * a.cwiseAbs().maxCoeff();
}

template <typename Scalar>
void require_compatible(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g, const char* where) {
  if (f.dim() != g.dim() || f.size() != g.size()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(where) + ": families differ in dimension or atom count");
  }
  if (!same_weights(f.weights(), g.weights())) {
    throw Error(ErrorCode::ShapeMismatch, std::string(where) + ": families must share quadrature weights");
  }
}

}  // namespace detail

/// Mixed frame operator sum_k w_k F_k G_k^T; equals I exactly when G is a dual of F.
template <typename Scalar>
Matrix<Scalar> mixed_frame_operator(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g) {
  detail::require_compatible(f, g, "mixed_frame_operator");
  return f.atoms() * f.weights().asDiagonal() * g.atoms().transpose();
}

template <typename Scalar>
DualCheck<Scalar> is_dual_pair(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g) {
  const Matrix<Scalar> m = mixed_frame_operator(f, g);
  const Scalar residual = op_norm(Matrix<Scalar>(m - Matrix<Scalar>::Identity(f.dim(), f.dim())));
  return {residual <= Scalar(kDualTolerance), residual};
}

/// Atomwise sum of two shape-compatible families.
template <typename Scalar>
DiscretizedFrame<Scalar> atomwise_sum(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                      Scalar g_scale = Scalar(1)) {
  detail::require_compatible(f, g, "atomwise_sum");
  return f.with_atoms(f.atoms() + g_scale * g.atoms(), f.label());
}

/// Applies an operator to every atom: {T F_k}.
template <typename Scalar, typename Derived>
DiscretizedFrame<Scalar> apply_operator(const Eigen::MatrixBase<Derived>& t, const DiscretizedFrame<Scalar>& f,
                                        std::string label = {}) {
  if (t.rows() != f.dim() || t.cols() != f.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "operator must be dim x dim");
  }
  return f.with_atoms(t * f.atoms(), label.empty() ? f.label() : std::move(label));
}

/// Orthonormal basis of ker(c -> sum_k w_k c_k F_k), as columns of an n x r matrix.
template <typename Scalar>
Matrix<Scalar> synthesis_null_space(const DiscretizedFrame<Scalar>& f) {
  const Matrix<Scalar> map = f.atoms() * f.weights().asDiagonal();
  Eigen::JacobiSVD<Matrix<Scalar>> solver(map, Eigen::ComputeFullV);
  const auto& sv = solver.singularValues();
  Eigen::Index rank = 0;
  if (sv.size() > 0 && sv(0) > Scalar(0)) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > Scalar(kSpanTolerance) * sv(0)) ++rank;
    }
  }
  return solver.matrixV().rightCols(f.size() - rank);
}

template <typename Scalar>
bool is_redundant(const DiscretizedFrame<Scalar>& f) {
  return synthesis_null_space(f).cols() > 0;
}

/// Bessel family {v_k = c_k g} with sum_k w_k <x, v_k> F_k = 0 for every x and
/// Bessel bound exactly `magnitude`. Zero family when the synthesis map is injective.
template <typename Scalar>
NullBesselFamily<Scalar> null_bessel_family(const DiscretizedFrame<Scalar>& f, Scalar magnitude, std::uint64_t seed) {
  if (!(magnitude >= Scalar(0))) throw Error(ErrorCode::BadParams, "magnitude must be non-negative");
  const Matrix<Scalar> null_space = synthesis_null_space(f);
  const bool redundant = null_space.cols() > 0;
  auto zero = [&] {
    return NullBesselFamily<Scalar>{f.with_atoms(Matrix<Scalar>::Zero(f.dim(), f.size()), "null bessel"), redundant,
                                    Vector<Scalar>::Zero(f.size()), Vector<Scalar>::Zero(f.dim())};
  };
  if (!redundant || magnitude == Scalar(0)) return zero();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector<Scalar> mix(null_space.cols());
  Vector<Scalar> direction(f.dim());
  do {
    for (Eigen::Index i = 0; i < mix.size(); ++i) mix(i) = Scalar(normal(rng));
  } while (mix.norm() == Scalar(0));
  do {
    for (Eigen::Index i = 0; i < direction.size(); ++i) direction(i) = Scalar(normal(rng));
  } while (direction.norm() == Scalar(0));
  direction.normalize();

  Vector<Scalar> c = null_space * mix;
  // B_V = ||c||_w^2 * ||g||^2 for a rank-one family.
  c *= std::sqrt(magnitude / weighted_norm_squared(f, c));
  Matrix<Scalar> atoms = direction * c.transpose();
  return {f.with_atoms(std::move(atoms), "null bessel"), true, std::move(c), std::move(direction)};
}

}  // namespace woven
