#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "oracles.hpp"
#include "woven/generators.hpp"
#include "woven/weaving.hpp"

using namespace woven;
using M = Matrix<double>;
using V = Vector<double>;
using F = DiscretizedFrame<double>;

namespace {

F swapped_onb2() {
  M a(2, 2);
  a << 0, 1, 1, 0;
  return F(a, "swapped");
}

M column(double x, double y) { return (M(2, 1) << x, y).finished(); }

}  // namespace

TEST_CASE("weave examples") {
  const F f = random_gaussian(3, 5, 1);
  const Partition mixed{{0, 1, 1, 0, 1}, 2};
  CHECK(weave(f, f, mixed).atoms() == f.atoms());

  const F w = weave(onb(2), scaled_copy(onb(2), 2.0), Partition{{0, 1}, 2});
  CHECK(w.atoms() == (M(2, 2) << 1, 0, 0, 2).finished());
  CHECK(w.weights() == V::Ones(2));

  const F g = random_gaussian(3, 5, 2).with_atoms(random_gaussian(3, 5, 2).atoms(), "g");
  const F same_weights = f.with_atoms(g.atoms(), "g");
  CHECK(weave(f, same_weights, Partition{{0, 0, 0, 0, 0}, 2}).atoms() == f.atoms());

  CHECK_THROWS_AS(weave(f, same_weights, Partition{{0, 1}, 2}), Error);
  CHECK_THROWS_AS(weave(f, same_weights, Partition{{0, 1, 2, 0, 0}, 2}), Error);
  // Differing weights are a hard error.
  CHECK_THROWS_AS(weave(f, g, mixed), Error);
}

TEST_CASE("partition sweep ordering") {
  const PartitionSweep ex(3, 2, SweepMode::exhaustive());
  CHECK(ex.size() == 8);
  CHECK(ex.at(0).assignment == std::vector<int>{0, 0, 0});
  CHECK(ex.at(1).assignment == std::vector<int>{0, 0, 1});
  CHECK(ex.at(4).assignment == std::vector<int>{1, 0, 0});
  CHECK_THROWS_AS(PartitionSweep(21, 2, SweepMode::exhaustive()), Error);
  CHECK_NOTHROW(PartitionSweep(20, 2, SweepMode::exhaustive()));

  const PartitionSweep s(30, 2, SweepMode::sampled(50, 9));
  CHECK(s.size() == 52);
  CHECK(s.at(0).assignment == std::vector<int>(30, 0));
  CHECK(s.at(1).assignment == std::vector<int>(30, 1));
  CHECK(s.at(7) == PartitionSweep(30, 2, SweepMode::sampled(50, 9)).at(7));
  CHECK_FALSE(s.at(7) == PartitionSweep(30, 2, SweepMode::sampled(50, 10)).at(7));
}

TEST_CASE("weaving bounds examples") {
  const auto r = weaving_bounds(onb(2), scaled_copy(onb(2), 2.0), SweepMode::exhaustive());
  CHECK(r.universal_lower == doctest::Approx(1.0));
  CHECK(r.universal_upper == doctest::Approx(4.0));
  CHECK(r.woven);
  CHECK(r.partitions_examined == 4);

  const auto s = weaving_bounds(onb(2), swapped_onb2(), SweepMode::exhaustive());
  CHECK_FALSE(s.woven);
  CHECK(s.worst_partition.assignment == std::vector<int>{0, 1});
  CHECK(weave(onb(2), swapped_onb2(), s.worst_partition).atoms() == (M(2, 2) << 1, 1, 0, 0).finished());
  CHECK(s.universal_lower == doctest::Approx(0.0).scale(1e-12));

  const F f = random_gaussian(3, 8, 4);
  const auto fb = frame_bounds(f);
  for (const auto mode : {SweepMode::exhaustive(), SweepMode::sampled(100, 3)}) {
    const auto same = weaving_bounds(f, f, mode);
    CHECK(same.universal_lower == doctest::Approx(fb.lower).epsilon(1e-12));
    CHECK(same.universal_upper == doctest::Approx(fb.upper).epsilon(1e-12));
  }
  CHECK_THROWS_AS(weaving_bounds(onb(2), onb(3), SweepMode::exhaustive()), Error);
}

TEST_CASE("is_woven examples") {
  for (Eigen::Index m = 1; m <= 5; ++m) CHECK(is_woven(onb(m), onb(m), SweepMode::exhaustive()).woven);
  CHECK_FALSE(is_woven(onb(2), swapped_onb2(), SweepMode::exhaustive()).woven);
  const F m = tight_mercedes();
  const auto v = is_woven(m, scaled_copy(m, 0.999), SweepMode::exhaustive());
  CHECK(v.woven);
  CHECK(v.report.partitions_examined == 8);
}

TEST_CASE("sweeps agree with the independent oracle and with every worker count") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(seed % 3);
    const Eigen::Index n = dim + 2 + static_cast<Eigen::Index>(seed % 4);
    const F f = random_gaussian(dim, n, seed);
    const F g = f.with_atoms(random_gaussian(dim, n, seed + 100).atoms(), "g");
    const auto report = weaving_bounds(f, g, SweepMode::exhaustive(), SweepOptions{true});
    const auto ref = oracle::exhaustive_weaving(f.atoms(), g.atoms(), f.weights());
    CHECK(report.partitions_examined == ref.examined);
    CHECK(std::abs(report.universal_lower - std::max(ref.lower, 0.0)) <= 1e-10 * ref.upper);
    CHECK(std::abs(report.universal_upper - ref.upper) <= 1e-10 * ref.upper);
    // Bessel additivity and the sandwich property.
    CHECK(report.universal_upper <= report.bessel_sum + 1e-9);
    for (std::size_t i = 0; i < report.lower_series.size(); ++i) {
      CHECK(report.lower_series[i] >= report.universal_lower);
      CHECK(report.upper_series[i] <= report.universal_upper);
    }
    const auto worst = weave(f, g, report.worst_partition);
    CHECK(frame_bounds(worst).lower == doctest::Approx(report.universal_lower).epsilon(1e-9).scale(1e-12));
    // Sampled sweeps see a subset.
    const auto sampled = weaving_bounds(f, g, SweepMode::sampled(64, seed));
    CHECK(sampled.universal_lower >= report.universal_lower - 1e-15);
    CHECK(sampled.universal_upper <= report.universal_upper + 1e-15);
  }

  const F f = random_gaussian(3, 14, 77);
  const F g = f.with_atoms(random_gaussian(3, 14, 78).atoms(), "g");
  auto run = [&](const char* threads, SweepMode mode) {
    setenv("WOVEN_THREADS", threads, 1);
    auto r = weaving_bounds(f, g, mode, SweepOptions{true});
    unsetenv("WOVEN_THREADS");
    return r;
  };
  for (const auto mode : {SweepMode::exhaustive(), SweepMode::sampled(5000, 5)}) {
    const auto one = run("1", mode);
    for (const char* t : {"2", "3", "8"}) {
      const auto many = run(t, mode);
      CHECK(many.universal_lower == one.universal_lower);
      CHECK(many.universal_upper == one.universal_upper);
      CHECK(many.worst_partition == one.worst_partition);
      CHECK(many.lower_series == one.lower_series);
    }
  }
}

TEST_CASE("subspace distance examples") {
  CHECK(subspace_distance(column(1, 0), column(0, 1)) == doctest::Approx(1.0));
  CHECK(subspace_distance(column(1, 0), column(1, 1)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(subspace_distance(column(1, 0), column(-3, 0)) == doctest::Approx(0.0).scale(1e-15));
  CHECK_THROWS_AS(subspace_distance(column(0, 0), column(1, 0)), Error);
  CHECK_THROWS_AS(subspace_distance(column(1, 0), M(M::Identity(3, 1))), Error);
}

TEST_CASE("subspace distance matches brute force and is symmetric") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index dim = 2 + trial % 2;
    const Eigen::Index k1 = 1 + trial % (dim - 1), k2 = 1 + (trial / 2) % (dim - 1);
    M u1(dim, k1), u2(dim, k2);
    for (Eigen::Index i = 0; i < u1.size(); ++i) u1.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < u2.size(); ++i) u2.data()[i] = normal(rng);
    const auto directed = directed_subspace_distances(u1, u2);
    const double d12 = subspace_distance(u1, u2), d21 = subspace_distance(u2, u1);
    CHECK(std::abs(d12 - d21) <= 1e-10);
    const double brute = std::min(oracle::sampled_distance(u1, u2, 100000, trial),
                                  oracle::sampled_distance(u2, u1, 100000, trial + 1000));
    CHECK(std::abs(d12 - brute) <= 1e-3);
    CHECK(std::abs(directed.from_second - oracle::sampled_distance(u1, u2, 100000, 7)) <= 1e-3);
  }
  // Zero iff the spans meet: two planes in R^3 always do.
  M p1(3, 2), p2(3, 2);
  p1 << 1, 0, 0, 1, 0, 0;
  p2 << 1, 0, 0, 1, 1, 1;
  CHECK(subspace_distance(p1, p2) < 1e-12);
}

TEST_CASE("Riesz criterion examples") {
  for (Eigen::Index m = 2; m <= 4; ++m) {
    const auto c = riesz_weaving_criterion(onb(m), onb(m), SweepMode::exhaustive());
    CHECK(c.woven);
    CHECK(c.min_distance == doctest::Approx(1.0));
    CHECK(c.consistent);
  }
  const auto swapped = riesz_weaving_criterion(onb(2), swapped_onb2(), SweepMode::exhaustive());
  CHECK_FALSE(swapped.woven);
  CHECK(swapped.min_distance == doctest::Approx(0.0).scale(1e-15));
  // K = {first atom}, reported 0-based.
  CHECK(swapped.witness_k() == std::vector<Eigen::Index>{0});
  CHECK(swapped.consistent);

  const auto scaled = riesz_weaving_criterion(onb(2), scaled_copy(onb(2), 0.9), SweepMode::exhaustive());
  CHECK(scaled.woven);
  CHECK(scaled.min_distance == doctest::Approx(1.0));
  CHECK_THROWS_AS(riesz_weaving_criterion(tight_mercedes(), tight_mercedes(), SweepMode::exhaustive()), Error);
}

TEST_CASE("Riesz criterion agrees with the sweep on random pairs") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(seed % 5);
    const F f = random_riesz(m, seed);
    // Every fourth pair shares a span by swapping two atoms.
    M ga = random_riesz(m, seed + 500).atoms();
    if (seed % 4 == 0) {
      ga = f.atoms();
      ga.col(0).swap(ga.col(1));
    }
    const F g(ga);
    const auto c = riesz_weaving_criterion(f, g, SweepMode::exhaustive());
    const auto ref = is_woven(f, g, SweepMode::exhaustive());
    CHECK(c.woven == ref.woven);
    CHECK(c.consistent);
  }
}
