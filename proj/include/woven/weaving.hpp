#pragma once

// Weavings of shape-compatible families and the partition sweeps that bound
// them. Exhaustive sweeps visit assignments in lexicographic order (atom 0 is
// the most significant digit); sampled sweeps derive partition i from
// (seed, i) alone, so results never depend on the worker count.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "woven/error.hpp"
#include "woven/frames.hpp"
#include "woven/linalg.hpp"

namespace woven {

/// Largest partition count an exhaustive sweep will enumerate.
inline constexpr std::uint64_t kExhaustiveCap = std::uint64_t{1} << 20;

/// Default number of random partitions in sampled mode.
inline constexpr std::size_t kDefaultSamples = 10000;

/// Subspace distances at or below this count as zero when no Riesz bounds
/// are at hand. Weaving lower bounds scale like distance^2.
inline const double kDistanceTolerance = std::sqrt(kFrameTolerance);

struct Partition {
  std::vector<int> assignment;
  int branches = 2;

  /// Indices k with assignment[k] == branch.
  std::vector<Eigen::Index> members(int branch) const {
    std::vector<Eigen::Index> out;
    for (std::size_t k = 0; k < assignment.size(); ++k)
      if (assignment[k] == branch) out.push_back(static_cast<Eigen::Index>(k));
    return out;
  }

  bool single_branch() const {
    return std::all_of(assignment.begin(), assignment.end(), [&](int b) { return b == assignment.front(); });
  }

  bool operator==(const Partition&) const = default;
};

struct SweepMode {
  enum class Kind { Exhaustive, Sampled };
  Kind kind = Kind::Exhaustive;
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;

  static SweepMode exhaustive() { return {}; }
  static SweepMode sampled(std::size_t samples, std::uint64_t seed) { return {Kind::Sampled, samples, seed}; }

  bool is_exhaustive() const { return kind == Kind::Exhaustive; }

  std::string describe() const {
    if (is_exhaustive()) return "exhaustive";
    return "sampled(count=" + std::to_string(samples) + ",seed=" + std::to_string(seed) + ")";
  }
};

/// Index-addressable set of partitions examined by a sweep.
class PartitionSweep {
 public:
  PartitionSweep(std::size_t atoms, int branches, SweepMode mode)
      : atoms_(atoms), branches_(branches), mode_(mode) {
    if (branches_ < 2) throw Error(ErrorCode::BadPartition, "a weaving needs at least two branches");
    if (mode_.is_exhaustive()) {
      std::uint64_t total = 1;
      for (std::size_t k = 0; k < atoms_; ++k) {
        total *= static_cast<std::uint64_t>(branches_);
        if (total > kExhaustiveCap) {
          throw Error(ErrorCode::TooLargeForExhaustive,
                      std::to_string(branches_) + "^" + std::to_string(atoms_) + " partitions exceed 2^20; use sampled mode");
        }
      }
      count_ = total;
    } else {
      count_ = static_cast<std::uint64_t>(branches_) + mode_.samples;
    }
  }

  std::uint64_t size() const { return count_; }
  const SweepMode& mode() const { return mode_; }

  void fill(std::uint64_t index, std::vector<int>& assignment) const {
    assignment.resize(atoms_);
    if (mode_.is_exhaustive()) {
      for (std::size_t k = atoms_; k-- > 0;) {
        assignment[k] = static_cast<int>(index % static_cast<std::uint64_t>(branches_));
        index /= static_cast<std::uint64_t>(branches_);
      }
      return;
    }
    if (index < static_cast<std::uint64_t>(branches_)) {
      std::fill(assignment.begin(), assignment.end(), static_cast<int>(index));
      return;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(mode_.seed), static_cast<std::uint32_t>(mode_.seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 rng(seq);
    for (auto& a : assignment) a = static_cast<int>(rng() % static_cast<std::uint64_t>(branches_));
  }

  Partition at(std::uint64_t index) const {
    Partition p{{}, branches_};
    fill(index, p.assignment);
    return p;
  }

 private:
  std::size_t atoms_;
  int branches_;
  SweepMode mode_;
  std::uint64_t count_ = 0;
};

/// Worker count for sweeps: WOVEN_THREADS if set, else hardware concurrency.
inline unsigned sweep_threads() {
  if (const char* env = std::getenv("WOVEN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

/// Runs body(begin, end, worker) over contiguous chunks of [0, count).
template <typename Body>
void parallel_chunks(std::uint64_t count, unsigned workers, Body&& body) {
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, count / 256)));
  if (workers <= 1) {
    body(std::uint64_t{0}, count, 0u);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  pool.reserve(workers);
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min<std::uint64_t>(count, w * chunk);
    const std::uint64_t end = std::min(count, begin + chunk);
    pool.emplace_back([&body, &failures, begin, end, w] {
      try {
        body(begin, end, w);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : failures)
    if (e) std::rethrow_exception(e);
}

template <typename Scalar>
void require_weavable(std::span<const DiscretizedFrame<Scalar>> families) {
  if (families.size() < 2) throw Error(ErrorCode::ShapeMismatch, "weaving needs at least two families");
  for (std::size_t i = 1; i < families.size(); ++i) require_compatible(families[0], families[i], "weave");
}

template <typename Scalar>
void require_partition(std::span<const DiscretizedFrame<Scalar>> families, const Partition& p) {
  if (static_cast<Eigen::Index>(p.assignment.size()) != families[0].size()) {
    throw Error(ErrorCode::BadPartition, "partition length does not match atom count");
  }
  if (p.branches != static_cast<int>(families.size())) {
    throw Error(ErrorCode::BadPartition, "partition branch count does not match family count");
  }
  for (int b : p.assignment) {
    if (b < 0 || b >= p.branches) throw Error(ErrorCode::BadPartition, "branch index out of range");
  }
}

}  // namespace detail

template <typename Scalar>
DiscretizedFrame<Scalar> weave(std::span<const DiscretizedFrame<Scalar>> families, const Partition& p) {
  detail::require_weavable(families);
  detail::require_partition(families, p);
  Matrix<Scalar> atoms(families[0].dim(), families[0].size());
  for (Eigen::Index k = 0; k < atoms.cols(); ++k) atoms.col(k) = families[p.assignment[k]].atom(k);
  return families[0].with_atoms(std::move(atoms), "weaving");
}

template <typename Scalar>
DiscretizedFrame<Scalar> weave(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g, const Partition& p) {
  const DiscretizedFrame<Scalar> pair[] = {f, g};
  return weave(std::span<const DiscretizedFrame<Scalar>>(pair), p);
}

template <typename Scalar>
struct WeavingReport {
  Scalar universal_lower = Scalar(0);
  Scalar universal_upper = Scalar(0);
  bool woven = false;
  Partition worst_partition;
  std::uint64_t partitions_examined = 0;
  SweepMode mode;
  /// Sum of the families' individual upper bounds.
  Scalar bessel_sum = Scalar(0);
  /// Per-partition bounds in sweep order, filled only when requested.
  std::vector<Scalar> lower_series;
  std::vector<Scalar> upper_series;
};

struct SweepOptions {
  bool record_series = false;
  double tolerance = kFrameTolerance;
};

template <typename Scalar>
WeavingReport<Scalar> weaving_bounds(std::span<const DiscretizedFrame<Scalar>> families, SweepMode mode,
                                     SweepOptions options = {}) {
  detail::require_weavable(families);
  const int branches = static_cast<int>(families.size());
  const auto n = static_cast<std::size_t>(families[0].size());
  const PartitionSweep sweep(n, branches, mode);

  std::vector<Matrix<Scalar>> roots;
  Scalar bessel_sum = Scalar(0);
  for (const auto& f : families) {
    roots.push_back(f.weighted_atoms());
    bessel_sum += frame_bounds(f).upper;
  }

  struct Partial {
    Scalar lower = std::numeric_limits<Scalar>::infinity();
    std::uint64_t lower_index = 0;
    Scalar upper = Scalar(0);
  };
  const unsigned workers = sweep_threads();
  std::vector<Partial> partials(workers);
  std::vector<Scalar> lower_series, upper_series;
  if (options.record_series) {
    lower_series.resize(sweep.size());
    upper_series.resize(sweep.size());
  }

  detail::parallel_chunks(sweep.size(), workers, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
    Partial local;
    std::vector<int> assignment;
    Matrix<Scalar> x(families[0].dim(), families[0].size());
    Matrix<Scalar> s(families[0].dim(), families[0].dim());
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(families[0].dim());
    for (std::uint64_t i = begin; i < end; ++i) {
      sweep.fill(i, assignment);
      for (std::size_t k = 0; k < n; ++k) x.col(k) = roots[assignment[k]].col(k);
      s.noalias() = x * x.transpose();
      solver.compute(s, Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) throw Error(ErrorCode::DidNotConverge, "weaving eigenvalues");
      const Scalar lo = std::max(solver.eigenvalues()(0), Scalar(0));
      const Scalar hi = solver.eigenvalues()(solver.eigenvalues().size() - 1);
      if (lo < local.lower) {
        local.lower = lo;
        local.lower_index = i;
      }
      local.upper = std::max(local.upper, hi);
      if (options.record_series) {
        lower_series[i] = lo;
        upper_series[i] = hi;
      }
    }
    partials[w] = local;
  });

  Partial total;
  for (const auto& p : partials) {
    if (p.lower < total.lower || (p.lower == total.lower && p.lower_index < total.lower_index)) {
      total.lower = p.lower;
      total.lower_index = p.lower_index;
    }
    total.upper = std::max(total.upper, p.upper);
  }

  WeavingReport<Scalar> report;
  report.universal_lower = total.lower;
  report.universal_upper = total.upper;
  report.woven = total.upper > Scalar(0) && total.lower > Scalar(options.tolerance) * total.upper;
  report.worst_partition = sweep.at(total.lower_index);
  report.partitions_examined = sweep.size();
  report.mode = mode;
  report.bessel_sum = bessel_sum;
  report.lower_series = std::move(lower_series);
  report.upper_series = std::move(upper_series);
  return report;
}

template <typename Scalar>
WeavingReport<Scalar> weaving_bounds(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                     SweepMode mode, SweepOptions options = {}) {
  const DiscretizedFrame<Scalar> pair[] = {f, g};
  return weaving_bounds(std::span<const DiscretizedFrame<Scalar>>(pair), mode, options);
}

template <typename Scalar>
struct WovenVerdict {
  bool woven;
  WeavingReport<Scalar> report;
};

/// Woven iff every examined weaving has lower bound > tolerance * universal_upper.
/// With finitely many partitions this is both the weak and the uniform notion.
template <typename Scalar>
WovenVerdict<Scalar> is_woven(std::span<const DiscretizedFrame<Scalar>> families, SweepMode mode,
                              double tolerance = kFrameTolerance) {
  auto report = weaving_bounds(families, mode, SweepOptions{false, tolerance});
  const bool woven = report.woven;
  return {woven, std::move(report)};
}

template <typename Scalar>
WovenVerdict<Scalar> is_woven(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g, SweepMode mode,
                              double tolerance = kFrameTolerance) {
  const DiscretizedFrame<Scalar> pair[] = {f, g};
  return is_woven(std::span<const DiscretizedFrame<Scalar>>(pair), mode, tolerance);
}

// ---------------------------------------------------------------------------
// Subspace distance

template <typename Scalar>
struct DirectedDistances {
  /// inf over unit g in span(U2) of dist(g, span(U1)).
  Scalar from_second;
  /// inf over unit f in span(U1) of dist(f, span(U2)).
  Scalar from_first;

  Scalar distance() const { return std::min(from_second, from_first); }
};

namespace detail {

/// Smallest singular value of (I - Q1 Q1^T) Q2: the sine of the smallest
/// principal angle, computed without cancellation near zero.
template <typename Scalar>
Scalar sine_smallest_angle(const Matrix<Scalar>& q1, const Matrix<Scalar>& q2) {
  const Matrix<Scalar> residual = q2 - q1 * (q1.transpose() * q2);
  const auto sv = singular_values(residual);
  return std::clamp(sv(sv.size() - 1), Scalar(0), Scalar(1));
}

template <typename Derived>
Matrix<typename Derived::Scalar> subspace_basis(const Eigen::MatrixBase<Derived>& vectors, const char* which) {
  using Scalar = typename Derived::Scalar;
  auto q = orthonormal_basis(vectors, Scalar(kSpanTolerance));
  if (q.cols() == 0) throw Error(ErrorCode::ZeroSubspace, std::string(which) + " spans the zero subspace");
  return q;
}

}  // namespace detail

/// Both directed distances between the column spans of u1 and u2.
template <typename D1, typename D2>
DirectedDistances<typename D1::Scalar> directed_subspace_distances(const Eigen::MatrixBase<D1>& u1,
                                                                   const Eigen::MatrixBase<D2>& u2) {
  if (u1.rows() != u2.rows()) throw Error(ErrorCode::DimensionMismatch, "subspaces live in different spaces");
  const auto q1 = detail::subspace_basis(u1, "first list");
  const auto q2 = detail::subspace_basis(u2, "second list");
  return {detail::sine_smallest_angle(q1, q2), detail::sine_smallest_angle(q2, q1)};
}

/// min of the two directed distances; the sine of the smallest principal angle.
template <typename D1, typename D2>
typename D1::Scalar subspace_distance(const Eigen::MatrixBase<D1>& u1, const Eigen::MatrixBase<D2>& u2) {
  return directed_subspace_distances(u1, u2).distance();
}

// ---------------------------------------------------------------------------
// Riesz-basis weaving criterion

template <typename Scalar>
struct RieszCriterion {
  bool woven = false;
  Scalar min_distance = Scalar(1);
  /// Minimizing split; branch 0 marks K (atoms taken from F).
  Partition witness;
  std::uint64_t subsets_examined = 0;
  /// Splits whose distance sat inside the numerical band and were decided by
  /// their weaving lower bound.
  std::uint64_t settled_by_bound = 0;
  /// Verdict of the eigenvalue sweep over the same partitions.
  bool oracle_woven = false;
  bool consistent = false;
  WeavingReport<Scalar> oracle;

  std::vector<Eigen::Index> witness_k() const { return witness.members(0); }
};

/// span{F_k : k in K} and span{G_k : k not in K} for a two-branch partition.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> split_spans(const DiscretizedFrame<Scalar>& f,
                                                       const DiscretizedFrame<Scalar>& g,
                                                       const std::vector<int>& assignment) {
  const auto n = static_cast<Eigen::Index>(assignment.size());
  const auto in_k = static_cast<Eigen::Index>(std::count(assignment.begin(), assignment.end(), 0));
  Matrix<Scalar> fk(f.dim(), in_k), gc(g.dim(), n - in_k);
  Eigen::Index a = 0, b = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (assignment[k] == 0) fk.col(a++) = f.atom(k);
    else gc.col(b++) = g.atom(k);
  }
  return {std::move(fk), std::move(gc)};
}

namespace detail {

/// Smallest eigenvalue of the weaving operator for one split, computed the
/// same way as in weaving_bounds.
template <typename Scalar>
Scalar split_lower_bound(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                         const std::vector<int>& assignment) {
  const Matrix<Scalar> rf = f.weighted_atoms(), rg = g.weighted_atoms();
  Matrix<Scalar> x(f.dim(), f.size());
  for (Eigen::Index k = 0; k < x.cols(); ++k) x.col(k) = assignment[k] == 0 ? rf.col(k) : rg.col(k);
  Matrix<Scalar> s(f.dim(), f.dim());
  s.noalias() = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::DidNotConverge, "weaving eigenvalues");
  return std::max(solver.eigenvalues()(0), Scalar(0));
}

}  // namespace detail

/// Minimum over examined K (both K and K^C non-empty) of
/// d(span F_K, span G_{K^C}); woven iff every split has positive distance.
///
/// With an explicit `tolerance` a split counts as separated iff d > tolerance.
/// Without one, "positive" is read at the resolution of the frame tolerance:
/// for Riesz bases with joint bounds [A, B] a split's weaving bound L obeys
/// A d^2 / 2 <= L <= B d^2, so d <= sqrt(tau U / B) is zero and
/// d > sqrt(2 tau U / A) is positive. Splits between the two are settled by L.
template <typename Scalar>
RieszCriterion<Scalar> riesz_weaving_criterion(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                               SweepMode mode, std::optional<double> tolerance = std::nullopt) {
  detail::require_compatible(f, g, "riesz_weaving_criterion");
  if (!is_riesz_basis(f)) throw Error(ErrorCode::NotRieszBasis, "first family is not a Riesz basis");
  if (!is_riesz_basis(g)) throw Error(ErrorCode::NotRieszBasis, "second family is not a Riesz basis");

  RieszCriterion<Scalar> result;
  result.oracle = weaving_bounds(f, g, mode);
  result.oracle_woven = result.oracle.woven;

  const auto rf = riesz_bounds(f), rg = riesz_bounds(g);
  const Scalar a = std::min(rf.lower, rg.lower), b = std::max(rf.upper, rg.upper);
  const Scalar floor = Scalar(kFrameTolerance) * result.oracle.universal_upper;
  using std::sqrt;
  const Scalar zero_below = tolerance ? Scalar(*tolerance) : sqrt(floor / b);
  const Scalar positive_above = tolerance ? Scalar(*tolerance) : sqrt(Scalar(2) * floor / a);

  const PartitionSweep sweep(static_cast<std::size_t>(f.size()), 2, mode);
  result.min_distance = std::numeric_limits<Scalar>::infinity();
  std::uint64_t best_index = 0;
  bool separated = true;
  std::vector<int> assignment;
  for (std::uint64_t i = 0; i < sweep.size(); ++i) {
    sweep.fill(i, assignment);
    const auto in_k = std::count(assignment.begin(), assignment.end(), 0);
    if (in_k == 0 || in_k == static_cast<long>(assignment.size())) continue;
    const auto [fk, gc] = split_spans(f, g, assignment);
    const Scalar d = subspace_distance(fk, gc);
    ++result.subsets_examined;
    if (d < result.min_distance) {
      result.min_distance = d;
      best_index = i;
    }
    if (d <= zero_below) {
      separated = false;
    } else if (d <= positive_above) {
      ++result.settled_by_bound;
      if (detail::split_lower_bound(f, g, assignment) <= floor) separated = false;
    }
  }
  if (result.subsets_examined == 0) {
    // A single atom admits no split with both sides non-empty.
    result.min_distance = Scalar(1);
  }
  result.witness = sweep.at(best_index);
  result.woven = separated;
  result.consistent = result.oracle_woven == result.woven;
  return result;
}

}  // namespace woven
