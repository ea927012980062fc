#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "woven/frames.hpp"
#include "woven/generators.hpp"

using namespace woven;
using M = Matrix<double>;
using V = Vector<double>;
using F = DiscretizedFrame<double>;

namespace {

V vec(std::initializer_list<double> xs) {
  V v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

F frame_of(M atoms, V weights) { return F(std::move(atoms), std::move(weights)); }

M cols(std::initializer_list<std::initializer_list<double>> columns) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  const auto m = static_cast<Eigen::Index>(columns.begin()->size());
  M a(m, n);
  Eigen::Index j = 0;
  for (const auto& c : columns) {
    Eigen::Index i = 0;
    for (double x : c) a(i++, j) = x;
    ++j;
  }
  return a;
}

const double kHalfRoot3 = std::sqrt(3.0) / 2;

}  // namespace

TEST_CASE("invalid frames are rejected") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ParseError;
  };
  CHECK(code([] { frame_of(M::Identity(2, 2), vec({1, -1})); }) == ErrorCode::InvalidFrame);
  CHECK(code([] { frame_of(M::Identity(2, 2), vec({1})); }) == ErrorCode::InvalidFrame);
  CHECK(code([] { frame_of(M::Identity(2, 2), vec({1, NAN})); }) == ErrorCode::InvalidFrame);
  CHECK(code([] { frame_of(cols({{1, NAN}}), vec({1})); }) == ErrorCode::InvalidFrame);
  CHECK(code([] { frame_of(M(2, 0), V(0)); }) == ErrorCode::InvalidFrame);
}

TEST_CASE("frame operator examples") {
  CHECK((frame_operator(onb(2)) - M::Identity(2, 2)).norm() == 0.0);
  CHECK((frame_operator(frame_of(M::Identity(2, 2), vec({2, 2}))) - 2 * M::Identity(2, 2)).norm() < 1e-15);
  CHECK((frame_operator(tight_mercedes()) - 1.5 * M::Identity(2, 2)).norm() < 1e-15);
  // The hand-written Mercedes atoms agree with the generator.
  const M hand = cols({{0, 1}, {-kHalfRoot3, -0.5}, {kHalfRoot3, -0.5}});
  CHECK((tight_mercedes().atoms() - hand).norm() < 1e-15);
}

TEST_CASE("frame bounds examples") {
  const auto o = frame_bounds(onb(4));
  CHECK(o.lower == doctest::Approx(1.0));
  CHECK(o.upper == doctest::Approx(1.0));
  const auto m = frame_bounds(tight_mercedes());
  CHECK(m.lower == doctest::Approx(1.5));
  CHECK(m.upper == doctest::Approx(1.5));
  const auto r = frame_bounds(F(cols({{1, 0}, {1, 0}, {0, 1}})));
  CHECK(r.lower == doctest::Approx(1.0));
  CHECK(r.upper == doctest::Approx(2.0));
  CHECK_FALSE(is_frame(F(cols({{1, 0}, {2, 0}}))));
}

TEST_CASE("analysis and synthesis examples") {
  const V a = analysis(onb(2), vec({3, 4}));
  CHECK(a(0) == 3.0);
  CHECK(a(1) == 4.0);
  const V m = analysis(tight_mercedes(), vec({0, 1}));
  CHECK(m(0) == doctest::Approx(1.0));
  CHECK(m(1) == doctest::Approx(-0.5));
  CHECK(m(2) == doctest::Approx(-0.5));
  CHECK(analysis(random_gaussian(4, 7, 1), V(V::Zero(4))).norm() == 0.0);

  CHECK((synthesis(onb(2), vec({3, 4})) - vec({3, 4})).norm() == 0.0);
  CHECK(synthesis(tight_mercedes(), vec({1, 1, 1})).norm() < 1e-15);
  CHECK((synthesis(frame_of(M::Identity(2, 2), vec({2, 2})), vec({1, 0})) - vec({2, 0})).norm() == 0.0);
}

TEST_CASE("riesz bounds examples") {
  const auto o = riesz_bounds(onb(3));
  CHECK(o.lower == doctest::Approx(1.0));
  CHECK(o.upper == doctest::Approx(1.0));
  const auto d = riesz_bounds(F(cols({{2, 0}, {0, 1}})));
  CHECK(d.lower == doctest::Approx(1.0));
  CHECK(d.upper == doctest::Approx(4.0));
  const auto m = riesz_bounds(tight_mercedes());
  CHECK(std::abs(m.lower) < 1e-12);
  CHECK_FALSE(is_riesz_basis(tight_mercedes()));
  CHECK(is_riesz_basis(onb(3)));
}

TEST_CASE("canonical dual examples") {
  CHECK((canonical_dual(onb(3)).atoms() - M::Identity(3, 3)).norm() < 1e-15);
  CHECK((canonical_dual(tight_mercedes()).atoms() - tight_mercedes().atoms() * (2.0 / 3)).norm() < 1e-14);
  CHECK((canonical_dual(F(cols({{2, 0}, {0, 1}}))).atoms() - cols({{0.5, 0}, {0, 1}})).norm() < 1e-15);
  CHECK_THROWS_AS(canonical_dual(F(cols({{1, 0}, {2, 0}}))), Error);
}

TEST_CASE("dual pair examples") {
  const F f = random_gaussian(4, 9, 3);
  CHECK(is_dual_pair(f, canonical_dual(f)).is_dual);
  CHECK(is_dual_pair(onb(3), onb(3)).is_dual);
  const auto bad = is_dual_pair(onb(3), scaled_copy(onb(3), 2.0));
  CHECK_FALSE(bad.is_dual);
  CHECK(bad.residual == doctest::Approx(1.0));
  CHECK_THROWS_AS(is_dual_pair(onb(2), onb(3)), Error);
}

TEST_CASE("null bessel family examples") {
  const auto o = null_bessel_family(onb(3), 1.0, 4);
  CHECK_FALSE(o.redundant);
  CHECK(o.family.atoms().norm() == 0.0);

  const F m = tight_mercedes();
  const auto n = null_bessel_family(m, 1.0, 4);
  CHECK(n.redundant);
  // c is proportional to (1, 1, 1).
  CHECK(std::abs(n.coefficients(0) - n.coefficients(1)) < 1e-12);
  CHECK(std::abs(n.coefficients(0) - n.coefficients(2)) < 1e-12);
  // B_V from the Gram of the family itself.
  CHECK(frame_bounds(n.family).upper == doctest::Approx(1.0));
  CHECK(synthesis(m, n.coefficients).norm() < 1e-12);

  CHECK(null_bessel_family(m, 0.0, 4).family.atoms().norm() == 0.0);
  CHECK(null_bessel_family(random_gaussian(3, 7, 2), 0.0, 9).family.atoms().norm() == 0.0);
}

TEST_CASE("generators") {
  const F o = onb(3);
  CHECK(o.atoms() == M::Identity(3, 3));
  CHECK(o.weights() == V::Ones(3));
  const auto s = frame_bounds(scaled_copy(onb(2), 2.0));
  CHECK(s.lower == doctest::Approx(4.0));
  CHECK(s.upper == doctest::Approx(4.0));

  // Determinism per seed, variation across seeds.
  CHECK(random_gaussian(4, 6, 8).atoms() == random_gaussian(4, 6, 8).atoms());
  CHECK(random_gaussian(4, 6, 8).atoms() != random_gaussian(4, 6, 9).atoms());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const F r = random_riesz(5, seed);
    CHECK(is_riesz_basis(r));
    const auto rb = riesz_bounds(r);
    CHECK(rb.lower >= 1 - 1e-9);
    CHECK(rb.upper <= 9 + 1e-9);
    // Riesz basis implies frame.
    CHECK(frame_bounds(r).lower > 0);
  }

  CHECK_THROWS_AS(onb(0), Error);
  CHECK_THROWS_AS(random_gaussian(0, 3, 1), Error);
  CHECK_THROWS_AS(translation(16, -1.0), Error);
  CHECK(parse_generator_kind("mercedes") == GeneratorKind::TightMercedes);
  CHECK_FALSE(parse_generator_kind("nope").has_value());
}

TEST_CASE("translation frame spectrum matches the DFT of the bump") {
  const F t = translation(16, 2.0);
  CHECK(t.dim() == 16);
  CHECK(t.size() == 16);
  std::vector<double> bump(16);
  for (int i = 0; i < 16; ++i) bump[i] = t.atoms()(i, 0);
  auto ev = oracle::circulant_eigenvalues(bump);
  for (double& x : ev) x *= x;
  std::sort(ev.begin(), ev.end());
  const auto fb = frame_bounds(t);
  CHECK(fb.lower > 0);
  CHECK(fb.lower == doctest::Approx(ev.front()).epsilon(1e-9));
  CHECK(fb.upper == doctest::Approx(ev.back()).epsilon(1e-9));
  CHECK(is_frame(t));
}

TEST_CASE("frame properties on random instances") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(seed % 6);
    const Eigen::Index n = m + static_cast<Eigen::Index>(seed % 5);
    const F f = random_gaussian(m, n, seed);
    const auto b = frame_bounds(f);
    const auto ref = oracle::frame_bounds(f.atoms(), f.weights());
    CHECK(std::abs(b.lower - ref.lower) <= 1e-10 * ref.upper);
    CHECK(std::abs(b.upper - ref.upper) <= 1e-10 * ref.upper);
    if (!b.is_frame()) continue;
    const F dual = canonical_dual(f);
    const M s = frame_operator(f);
    for (int trial = 0; trial < 100; ++trial) {
      V x(m);
      for (Eigen::Index i = 0; i < m; ++i) x(i) = normal(rng);
      const double energy = weighted_norm_squared(f, analysis(f, x));
      const double x2 = x.squaredNorm();
      CHECK(energy >= b.lower * x2 * (1 - 1e-9));
      CHECK(energy <= b.upper * x2 * (1 + 1e-9));
      CHECK((synthesis(f, analysis(f, x)) - s * x).norm() <= 1e-10 * (s * x).norm() + 1e-14);
      CHECK((synthesis(f, analysis(dual, x)) - x).norm() <= 1e-8 * x.norm());
    }
    // Weight covariance.
    const auto doubled = frame_bounds(frame_of(f.atoms(), 2 * f.weights()));
    CHECK(std::abs(doubled.lower - 2 * b.lower) <= 1e-12 * 2 * b.upper);
    CHECK(std::abs(doubled.upper - 2 * b.upper) <= 1e-12 * 2 * b.upper);
    // Every null-Bessel perturbation of the canonical dual is again a dual.
    if (is_redundant(f)) {
      for (double c : {0.1, 1.0, 10.0}) {
        const auto v = null_bessel_family(f, c, seed + 17);
        CHECK(frame_bounds(v.family).upper == doctest::Approx(c).epsilon(1e-9));
        const auto check = is_dual_pair(f, atomwise_sum(dual, v.family));
        CHECK(check.is_dual);
      }
    }
  }
}
