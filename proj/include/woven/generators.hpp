#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "woven/error.hpp"
#include "woven/frames.hpp"
#include "woven/linalg.hpp"

namespace woven {

namespace detail {

template <typename Scalar>
Matrix<Scalar> gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Scalar(normal(rng));
  return m;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
template <typename Scalar>
Matrix<Scalar> random_orthogonal(Eigen::Index m, std::mt19937_64& rng) {
  const Matrix<Scalar> g = gaussian_matrix<Scalar>(m, m, rng);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(g);
  Matrix<Scalar> q = qr.householderQ();
  const Matrix<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (r(i, i) < Scalar(0)) q.col(i) = -q.col(i);
  }
  return q;
}

inline void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::BadParams, message);
}

}  // namespace detail

template <typename Scalar = double>
DiscretizedFrame<Scalar> onb(Eigen::Index m) {
  detail::require(m >= 1, "onb: dimension must be at least 1");
  return DiscretizedFrame<Scalar>(Matrix<Scalar>::Identity(m, m), "onb(" + std::to_string(m) + ")");
}

/// Gaussian atoms scaled by 1/sqrt(n) with weights drawn from [0.5, 1.5].
template <typename Scalar = double>
DiscretizedFrame<Scalar> random_gaussian(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  detail::require(m >= 1 && n >= 1, "random_gaussian: dimension and count must be at least 1");
  std::mt19937_64 rng(seed);
  Matrix<Scalar> atoms = detail::gaussian_matrix<Scalar>(m, n, rng) / std::sqrt(Scalar(n));
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  Vector<Scalar> weights(n);
  for (Eigen::Index k = 0; k < n; ++k) weights(k) = Scalar(uniform(rng));
  return DiscretizedFrame<Scalar>(std::move(atoms), std::move(weights),
                                  "random_gaussian(" + std::to_string(m) + "," + std::to_string(n) + ")");
}

/// Image of the standard basis under U diag(s) V^T with s in [1, 3] (condition number <= 3).
template <typename Scalar = double>
DiscretizedFrame<Scalar> random_riesz(Eigen::Index m, std::uint64_t seed) {
  detail::require(m >= 1, "random_riesz: dimension must be at least 1");
  std::mt19937_64 rng(seed);
  const Matrix<Scalar> u = detail::random_orthogonal<Scalar>(m, rng);
  const Matrix<Scalar> v = detail::random_orthogonal<Scalar>(m, rng);
  std::uniform_real_distribution<double> uniform(1.0, 3.0);
  Vector<Scalar> s(m);
  for (Eigen::Index i = 0; i < m; ++i) s(i) = Scalar(uniform(rng));
  return DiscretizedFrame<Scalar>(u * s.asDiagonal() * v.transpose(), "random_riesz(" + std::to_string(m) + ")");
}

/// Three unit vectors at 120 degrees in R^2; tight with bound 3/2.
template <typename Scalar = double>
DiscretizedFrame<Scalar> tight_mercedes() {
  using std::sqrt;
  Matrix<Scalar> atoms(2, 3);
  const Scalar h = sqrt(Scalar(3)) / Scalar(2);
  atoms << Scalar(0), -h, h,
           Scalar(1), Scalar(-0.5), Scalar(-0.5);
  return DiscretizedFrame<Scalar>(std::move(atoms), "mercedes");
}

template <typename Scalar>
DiscretizedFrame<Scalar> scaled_copy(const DiscretizedFrame<Scalar>& f, Scalar factor) {
  detail::require(std::isfinite(static_cast<double>(factor)), "scaled_copy: factor must be finite");
  return f.with_atoms(factor * f.atoms(), f.label() + " x" + std::to_string(static_cast<double>(factor)));
}

/// Cyclic translates of a periodized Gaussian bump on a grid of `grid_size`
/// points. The frame operator is circulant; its eigenvalues are |DFT(bump)|^2.
template <typename Scalar = double>
DiscretizedFrame<Scalar> translation(Eigen::Index grid_size, Scalar width) {
  detail::require(grid_size >= 1, "translation: grid size must be at least 1");
  detail::require(width > Scalar(0) && std::isfinite(static_cast<double>(width)), "translation: width must be positive");
  Matrix<Scalar> atoms(grid_size, grid_size);
  for (Eigen::Index shift = 0; shift < grid_size; ++shift) {
    for (Eigen::Index t = 0; t < grid_size; ++t) {
      const Eigen::Index offset = (t - shift + grid_size) % grid_size;
      const Scalar distance = Scalar(std::min(offset, grid_size - offset));
      atoms(t, shift) = std::exp(-distance * distance / (Scalar(2) * width * width));
    }
  }
  return DiscretizedFrame<Scalar>(std::move(atoms), "translation(" + std::to_string(grid_size) + ")");
}

enum class GeneratorKind { Onb, RandomGaussian, RandomRiesz, TightMercedes, ScaledCopy, Translation };

inline std::optional<GeneratorKind> parse_generator_kind(std::string_view name) {
  if (name == "onb") return GeneratorKind::Onb;
  if (name == "random_gaussian") return GeneratorKind::RandomGaussian;
  if (name == "random_riesz") return GeneratorKind::RandomRiesz;
  if (name == "tight_mercedes" || name == "mercedes") return GeneratorKind::TightMercedes;
  if (name == "scaled_copy" || name == "scaled") return GeneratorKind::ScaledCopy;
  if (name == "translation") return GeneratorKind::Translation;
  return std::nullopt;
}

template <typename Scalar = double>
struct GeneratorParams {
  Eigen::Index dim = 0;
  Eigen::Index count = 0;
  Eigen::Index grid_size = 0;
  Scalar width = Scalar(0);
  Scalar factor = Scalar(1);
  std::optional<DiscretizedFrame<Scalar>> source;
};

template <typename Scalar = double>
DiscretizedFrame<Scalar> generate(GeneratorKind kind, const GeneratorParams<Scalar>& params, std::uint64_t seed) {
  switch (kind) {
    case GeneratorKind::Onb: return onb<Scalar>(params.dim);
    case GeneratorKind::RandomGaussian: return random_gaussian<Scalar>(params.dim, params.count, seed);
    case GeneratorKind::RandomRiesz: return random_riesz<Scalar>(params.dim, seed);
    case GeneratorKind::TightMercedes: return tight_mercedes<Scalar>();
    case GeneratorKind::ScaledCopy:
      detail::require(params.source.has_value(), "scaled_copy needs a source frame");
      return scaled_copy(*params.source, params.factor);
    case GeneratorKind::Translation: return translation<Scalar>(params.grid_size, params.width);
  }
  throw Error(ErrorCode::BadParams, "unknown generator kind");
}

}  // namespace woven
