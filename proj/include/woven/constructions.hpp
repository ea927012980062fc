#pragma once

// Certified constructors and hypothesis checkers for woven pairs. Each check
// evaluates the hypotheses of a sufficient condition and, when they hold,
// records a universal lower bound that every weaving of the implied pair
// must respect. A failed hypothesis never means "not woven".

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "woven/error.hpp"
#include "woven/frames.hpp"
#include "woven/linalg.hpp"
#include "woven/weaving.hpp"

namespace woven {

/// Strict hypothesis inequalities must clear this relative margin.
inline constexpr double kHypothesisSlack = 1e-12;

/// Relative commutator norm accepted as "commuting".
inline constexpr double kCommutatorTolerance = 1e-9;

/// Number of random coefficient vectors used to test a caller-supplied premise.
inline constexpr std::size_t kPremiseSamples = 10000;

enum class PremiseMode { Certified, Sampled, NotApplicable };

constexpr std::string_view to_string(PremiseMode mode) {
  switch (mode) {
    case PremiseMode::Certified: return "certified";
    case PremiseMode::Sampled: return "sampled";
    case PremiseMode::NotApplicable: return "n/a";
  }
  return "n/a";
}

template <typename Scalar>
struct Certificate {
  std::string theorem;
  std::map<std::string, Scalar> hypothesis_values;
  Scalar guaranteed_lower = Scalar(0);
  bool hypothesis_satisfied = false;
  PremiseMode premise_mode = PremiseMode::NotApplicable;
};

/// Raised by constructors whose hypotheses fail; carries the evaluated quantities.
template <typename Scalar>
class CertificateError : public Error {
 public:
  CertificateError(ErrorCode code, const std::string& what, Certificate<Scalar> certificate)
      : Error(code, what), certificate_(std::move(certificate)) {}

  const Certificate<Scalar>& certificate() const noexcept { return certificate_; }

 private:
  Certificate<Scalar> certificate_;
};

/// A constructed family together with the certificate for (F, family).
template <typename Scalar>
struct Construction {
  DiscretizedFrame<Scalar> frame;
  Certificate<Scalar> certificate;
};

template <typename Scalar>
bool strictly_less(Scalar lhs, Scalar rhs) {
  using std::abs;
  return lhs < rhs - Scalar(kHypothesisSlack) * std::max(Scalar(1), abs(rhs));
}

namespace detail {

template <typename Scalar>
struct FrameSpectra {
  Matrix<Scalar> s;
  Matrix<Scalar> s_inv;
  FrameBounds<Scalar> bounds;
};

template <typename Scalar>
FrameSpectra<Scalar> frame_spectra(const DiscretizedFrame<Scalar>& f) {
  Matrix<Scalar> s = frame_operator(f);
  const auto ev = sym_eigenvalues(s);
  const FrameBounds<Scalar> bounds{std::max(ev(0), Scalar(0)), ev(ev.size() - 1)};
  if (!bounds.is_frame()) throw Error(ErrorCode::NotAFrame, "family is not a frame: lambda_min(S) too small");
  Matrix<Scalar> s_inv = solve_spd(s, Matrix<Scalar>::Identity(f.dim(), f.dim()));
  s_inv = (s_inv + s_inv.transpose()) / Scalar(2);
  return {std::move(s), std::move(s_inv), bounds};
}

template <typename Scalar, typename Derived>
void require_operator(const Eigen::MatrixBase<Derived>& t, Eigen::Index dim, const char* name) {
  if (t.rows() != dim || t.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be a dim x dim operator");
  }
  if (!all_finite(t) || !is_invertible(t)) throw Error(ErrorCode::NotInvertible, std::string(name) + " is not invertible");
}

template <typename Scalar>
Matrix<Scalar> identity(Eigen::Index dim) {
  return Matrix<Scalar>::Identity(dim, dim);
}

/// Positive root of beta^2 * bv + 2 * beta * sqrt(bv) * coupling = budget.
template <typename Scalar>
Scalar perturbation_root(Scalar budget, Scalar bv, Scalar coupling) {
  using std::sqrt;
  const Scalar lin = sqrt(bv) * coupling;
  // Rationalized form avoids cancellation when budget is small.
  return budget / (lin + sqrt(lin * lin + bv * budget));
}

}  // namespace detail

/// Lower bound R - beta^2 B_V - 2 beta sqrt(B_V) * coupling for weavings of F
/// with {M F_k + beta v_k}, where R bounds the weavings of F with {M F_k} and
/// coupling^2 is the upper frame bound of {M F_k}.
template <typename Scalar>
Scalar dual_perturbation_lower_bound(Scalar base_lower, Scalar beta, Scalar bessel_bound, Scalar coupling) {
  using std::sqrt;
  return base_lower - beta * beta * bessel_bound - Scalar(2) * beta * sqrt(bessel_bound) * coupling;
}

// ---------------------------------------------------------------------------

/// F and TF are woven with universal lower bound (sqrt(A) - sqrt(B)||I - T||)^2
/// whenever ||I - T||^2 < A/B.
template <typename Scalar, typename Derived>
Certificate<Scalar> operator_weaving_check(const DiscretizedFrame<Scalar>& f, const Eigen::MatrixBase<Derived>& t) {
  using std::sqrt;
  detail::require_operator<Scalar>(t, f.dim(), "T");
  const auto spectra = detail::frame_spectra(f);
  const Scalar a = spectra.bounds.lower, b = spectra.bounds.upper;
  const Scalar deviation = op_norm(Matrix<Scalar>(detail::identity<Scalar>(f.dim()) - t));
  const Scalar formula = (sqrt(a) - sqrt(b) * deviation) * (sqrt(a) - sqrt(b) * deviation);

  Certificate<Scalar> cert;
  cert.theorem = "operator-weaving";
  cert.premise_mode = PremiseMode::Certified;
  cert.hypothesis_values = {{"A_F", a},
                            {"B_F", b},
                            {"norm_I_minus_T", deviation},
                            {"norm_I_minus_T_squared", deviation * deviation},
                            {"A_over_B", a / b},
                            {"bound_formula", formula}};
  cert.hypothesis_satisfied = strictly_less(deviation * deviation, a / b);
  cert.guaranteed_lower = cert.hypothesis_satisfied ? formula : Scalar(0);
  return cert;
}

/// Non-canonical dual G = {S^-1 F_k + beta v_k} woven with F, for redundant F
/// with ||I - S^-1||^2 < A/B. V is a unit-Bessel null family; beta = eps / 2.
template <typename Scalar>
Construction<Scalar> construct_woven_dual(const DiscretizedFrame<Scalar>& f, std::uint64_t seed) {
  using std::sqrt;
  const auto spectra = detail::frame_spectra(f);
  if (!is_redundant(f)) throw Error(ErrorCode::NotRedundant, "frame has no redundancy (synthesis is injective)");
  const Scalar a = spectra.bounds.lower, b = spectra.bounds.upper;
  const Scalar deviation = op_norm(Matrix<Scalar>(detail::identity<Scalar>(f.dim()) - spectra.s_inv));

  Certificate<Scalar> cert;
  cert.theorem = "woven-dual";
  cert.premise_mode = PremiseMode::Certified;
  cert.hypothesis_values = {{"A_F", a}, {"B_F", b}, {"norm_I_minus_S_inv", deviation}, {"A_over_B", a / b}};
  if (!strictly_less(deviation * deviation, a / b)) {
    throw CertificateError<Scalar>(ErrorCode::HypothesisFailed, "||I - S^-1||^2 < A/B does not hold", cert);
  }

  const Scalar base = (sqrt(a) - sqrt(b) * deviation) * (sqrt(a) - sqrt(b) * deviation);
  const auto null_family = null_bessel_family(f, Scalar(1), seed);
  const Scalar bv = std::max(Scalar(1), frame_bounds(null_family.family).upper);
  // The canonical dual has upper frame bound 1/A, so the cross term couples through sqrt(1/A).
  const Scalar coupling = sqrt(Scalar(1) / a);
  const Scalar epsilon = detail::perturbation_root(base, bv, coupling);
  const Scalar beta = epsilon / Scalar(2);

  Matrix<Scalar> atoms = spectra.s_inv * f.atoms() + beta * null_family.family.atoms();
  DiscretizedFrame<Scalar> dual = f.with_atoms(std::move(atoms), "woven dual");
  const auto duality = is_dual_pair(f, dual);

  cert.hypothesis_values.insert({{"R", base},
                                 {"B_V", bv},
                                 {"epsilon", epsilon},
                                 {"beta", beta},
                                 {"dual_residual", duality.residual}});
  cert.guaranteed_lower = dual_perturbation_lower_bound(base, beta, bv, coupling);
  cert.hypothesis_satisfied = cert.guaranteed_lower > Scalar(0) && duality.is_dual;
  return {std::move(dual), std::move(cert)};
}

/// Approximate dual Phi = {T^* S^-1 F_k + beta v_k} woven with F, for redundant
/// F with ||I - T|| < 1 and ||I - T^* S^-1||^2 < A/B.
template <typename Scalar, typename Derived>
Construction<Scalar> construct_woven_approx_dual(const DiscretizedFrame<Scalar>& f, const Eigen::MatrixBase<Derived>& t,
                                                 std::uint64_t seed) {
  using std::sqrt;
  if (t.rows() != f.dim() || t.cols() != f.dim()) throw Error(ErrorCode::DimensionMismatch, "T must be dim x dim");
  const auto spectra = detail::frame_spectra(f);
  if (!is_redundant(f)) throw Error(ErrorCode::NotRedundant, "frame has no redundancy (synthesis is injective)");
  const Scalar a = spectra.bounds.lower, b = spectra.bounds.upper;
  const Matrix<Scalar> id = detail::identity<Scalar>(f.dim());
  const Matrix<Scalar> tm = t;
  const Matrix<Scalar> m = tm.transpose() * spectra.s_inv;
  const Scalar t_deviation = op_norm(Matrix<Scalar>(id - tm));
  const Scalar m_deviation = op_norm(Matrix<Scalar>(id - m));

  Certificate<Scalar> cert;
  cert.theorem = "woven-approx-dual";
  cert.premise_mode = PremiseMode::Certified;
  cert.hypothesis_values = {{"A_F", a},
                            {"B_F", b},
                            {"norm_I_minus_T", t_deviation},
                            {"norm_I_minus_Tt_S_inv", m_deviation},
                            {"A_over_B", a / b}};
  if (!strictly_less(t_deviation, Scalar(1)) || !strictly_less(m_deviation * m_deviation, a / b)) {
    throw CertificateError<Scalar>(ErrorCode::HypothesisFailed,
                                   "||I - T|| < 1 and ||I - T^* S^-1||^2 < A/B do not both hold", cert);
  }

  const DiscretizedFrame<Scalar> base_family = apply_operator(m, f, "approximate dual base");
  const auto base_bounds = frame_bounds(base_family);
  const Scalar base_f = (sqrt(a) - sqrt(b) * m_deviation) * (sqrt(a) - sqrt(b) * m_deviation);
  const Scalar root_g = sqrt(base_bounds.lower) - sqrt(b) * m_deviation;
  const Scalar base_g = root_g > Scalar(0) ? root_g * root_g : Scalar(0);

  const auto null_family = null_bessel_family(f, Scalar(1), seed);
  const Scalar bv = std::max(Scalar(1), frame_bounds(null_family.family).upper);
  const Scalar coupling = sqrt(base_bounds.upper);
  const Scalar coupling_printed = op_norm(Matrix<Scalar>(spectra.s_inv * tm)) * sqrt(b);
  const Scalar epsilon = detail::perturbation_root(base_f, bv, coupling);
  const Scalar epsilon_printed = root_g > Scalar(0) ? detail::perturbation_root(base_g, bv, coupling_printed) : Scalar(0);
  const Scalar beta = epsilon / Scalar(2);

  Matrix<Scalar> atoms = base_family.atoms() + beta * null_family.family.atoms();
  DiscretizedFrame<Scalar> phi = f.with_atoms(std::move(atoms), "woven approximate dual");
  const Scalar defect = op_norm(Matrix<Scalar>(mixed_frame_operator(f, phi) - id));
  const Scalar null_leak = op_norm(mixed_frame_operator(f, null_family.family));

  cert.hypothesis_values.insert({{"R_F", base_f},
                                 {"R_G", base_g},
                                 {"A_G", base_bounds.lower},
                                 {"B_V", bv},
                                 {"coupling", coupling},
                                 {"coupling_printed", coupling_printed},
                                 {"epsilon", epsilon},
                                 {"epsilon_printed", epsilon_printed},
                                 {"beta", beta},
                                 {"approximation_defect", defect},
                                 {"approximation_defect_bound", t_deviation + beta * null_leak}});
  cert.guaranteed_lower = dual_perturbation_lower_bound(base_f, beta, bv, coupling);
  cert.hypothesis_satisfied = cert.guaranteed_lower > Scalar(0);
  return {std::move(phi), std::move(cert)};
}

template <typename Scalar>
struct SpanningCheck {
  bool spans_all = true;
  /// First examined partition (branch 0 = K, taken from F) whose union fails to span.
  std::optional<Partition> witness;
  std::uint64_t partitions_examined = 0;
};

/// For a dual pair, checks that {F_k}_{k in K} u {G_k}_{k not in K} spans for every examined K.
template <typename Scalar>
SpanningCheck<Scalar> dual_union_spanning_check(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                                SweepMode mode) {
  detail::require_compatible(f, g, "dual_union_spanning_check");
  if (!is_dual_pair(f, g).is_dual) throw Error(ErrorCode::NotDualPair, "second family is not a dual of the first");
  const PartitionSweep sweep(static_cast<std::size_t>(f.size()), 2, mode);
  const Matrix<Scalar> rf = f.weighted_atoms(), rg = g.weighted_atoms();
  SpanningCheck<Scalar> result;
  result.partitions_examined = sweep.size();
  std::vector<int> assignment;
  Matrix<Scalar> x(f.dim(), f.size());
  for (std::uint64_t i = 0; i < sweep.size(); ++i) {
    sweep.fill(i, assignment);
    for (Eigen::Index k = 0; k < f.size(); ++k) x.col(k) = assignment[k] == 0 ? rf.col(k) : rg.col(k);
    if (numerical_rank(x, Scalar(kSpanTolerance)) < f.dim()) {
      result.spans_all = false;
      result.witness = sweep.at(i);
      break;
    }
  }
  return result;
}

/// F woven with its canonical dual: directly for Riesz bases, otherwise via a
/// split F = F_{K^C} (Riesz basis) u F_K with sum_K w_k ||F_k||^2 < sqrt(A/B).
template <typename Scalar>
Certificate<Scalar> canonical_dual_weaving_check(const DiscretizedFrame<Scalar>& f) {
  using std::sqrt;
  const auto spectra = detail::frame_spectra(f);
  const Scalar a = spectra.bounds.lower, b = spectra.bounds.upper;
  Certificate<Scalar> cert;
  cert.premise_mode = PremiseMode::Certified;

  if (is_riesz_basis(f)) {
    // F_K and the dual atoms off K span orthogonal complements.
    const auto rb = riesz_bounds(f);
    cert.theorem = "canonical-dual-riesz";
    cert.hypothesis_values = {{"riesz_lower", rb.lower}, {"riesz_upper", rb.upper}};
    cert.guaranteed_lower = std::min(rb.lower, Scalar(1) / rb.upper);
    cert.hypothesis_satisfied = true;
    return cert;
  }

  cert.theorem = "canonical-dual-small-redundancy";
  const Eigen::Index n = f.size();
  Vector<Scalar> energy(n);
  for (Eigen::Index k = 0; k < n; ++k) energy(k) = f.weights()(k) * f.atom(k).squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return energy(i) < energy(j); });

  std::vector<bool> kept(static_cast<std::size_t>(n), true);
  Eigen::Index remaining = n;
  auto remainder_atoms = [&] {
    Matrix<Scalar> r(f.dim(), remaining);
    Eigen::Index c = 0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (kept[k]) r.col(c++) = f.atom(k);
    return r;
  };
  for (Eigen::Index k : order) {
    if (remaining == f.dim()) break;
    kept[k] = false;
    --remaining;
    if (numerical_rank(remainder_atoms(), Scalar(kSpanTolerance)) < f.dim()) {
      kept[k] = true;
      ++remaining;
    }
  }

  Scalar removed_energy = 0;
  std::vector<bool> in_k(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    in_k[k] = !kept[k];
    if (!kept[k]) removed_energy += energy(k);
  }
  Vector<Scalar> basis_weights(remaining);
  for (Eigen::Index k = 0, c = 0; k < n; ++k)
    if (kept[k]) basis_weights(c++) = f.weights()(k);
  const DiscretizedFrame<Scalar> basis(remainder_atoms(), basis_weights, "riesz part");
  const bool split_ok = is_riesz_basis(basis);

  const Scalar threshold = sqrt(a / b);
  cert.hypothesis_values = {{"A_F", a},
                            {"B_F", b},
                            {"redundant_energy", removed_energy},
                            {"sqrt_A_over_B", threshold},
                            {"redundant_count", Scalar(n - remaining)},
                            {"split_is_riesz", split_ok ? Scalar(1) : Scalar(0)}};
  const bool split_condition = split_ok && strictly_less(removed_energy, threshold);

  Scalar guaranteed = 0;
  if (split_ok) {
    // Weavings restricted to the Riesz part are perturbations of the
    // biorthogonal weaving (bound min(A_R, 1/B_R)) by (S^-1 - S_R^-1).
    const auto rb = riesz_bounds(basis);
    const Matrix<Scalar> s_r_inv = solve_spd(frame_operator(basis), detail::identity<Scalar>(f.dim()));
    const Scalar drift = op_norm(Matrix<Scalar>(spectra.s_inv - s_r_inv));
    const Scalar root = sqrt(std::min(rb.lower, Scalar(1) / rb.upper)) - drift * sqrt(rb.upper);
    cert.hypothesis_values.insert({{"riesz_part_lower", rb.lower}, {"riesz_part_upper", rb.upper}, {"dual_drift", drift}});
    if (root > Scalar(0)) guaranteed = root * root;
  }
  cert.hypothesis_satisfied = split_condition && guaranteed > Scalar(0);
  cert.guaranteed_lower = cert.hypothesis_satisfied ? guaranteed : Scalar(0);
  return cert;
}

/// F woven with S^-1 F when S^-1 >= I and S commutes with every S_K.
template <typename Scalar>
Certificate<Scalar> s_inverse_weaving_check(const DiscretizedFrame<Scalar>& f, SweepMode mode) {
  const auto spectra = detail::frame_spectra(f);
  const Eigen::Index n = f.size();
  const Matrix<Scalar> id = detail::identity<Scalar>(f.dim());
  const Scalar excess_min = sym_eigenvalues(Matrix<Scalar>(spectra.s_inv - id))(0);
  const Scalar s_norm = spectra.bounds.upper;

  // Commuting with each rank-one S_{k} is equivalent to commuting with every S_K.
  Scalar worst_commutator = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Matrix<Scalar> sk = f.weights()(k) * f.atom(k) * f.atom(k).transpose();
    const Scalar sk_norm = op_norm(sk);
    if (sk_norm == Scalar(0)) continue;
    const Scalar c = op_norm(Matrix<Scalar>(spectra.s * sk - sk * spectra.s)) / (s_norm * sk_norm);
    worst_commutator = std::max(worst_commutator, c);
  }

  // Re-verify S_weaving - S >= 0 on the examined partitions (branch 0 = K keeps F).
  const PartitionSweep sweep(static_cast<std::size_t>(n), 2, mode);
  std::vector<int> assignment;
  std::vector<bool> mask(static_cast<std::size_t>(n));
  Scalar weaving_excess = std::numeric_limits<Scalar>::infinity();
  for (std::uint64_t i = 0; i < sweep.size(); ++i) {
    sweep.fill(i, assignment);
    for (Eigen::Index k = 0; k < n; ++k) mask[k] = assignment[k] == 0;
    const Matrix<Scalar> s_k = partial_frame_operator(f, mask);
    const Matrix<Scalar> s_kc = spectra.s - s_k;
    const Matrix<Scalar> woven_op = s_k + spectra.s_inv * s_kc * spectra.s_inv;
    const Matrix<Scalar> excess = woven_op - spectra.s;
    weaving_excess = std::min(weaving_excess, sym_eigenvalues(Matrix<Scalar>((excess + excess.transpose()) / Scalar(2)))(0));
  }

  Certificate<Scalar> cert;
  cert.theorem = "s-inverse-commuting";
  cert.premise_mode = PremiseMode::Certified;
  cert.hypothesis_values = {{"A_F", spectra.bounds.lower},
                            {"B_F", spectra.bounds.upper},
                            {"lambda_min_S_inv_minus_I", excess_min},
                            {"max_relative_commutator", worst_commutator},
                            {"min_weaving_excess", weaving_excess},
                            {"partitions_examined", Scalar(sweep.size())}};
  cert.hypothesis_satisfied = excess_min >= Scalar(-kFrameTolerance) && worst_commutator <= Scalar(kCommutatorTolerance);
  // S_weaving >= S, so every weaving inherits A_F.
  cert.guaranteed_lower = cert.hypothesis_satisfied ? spectra.bounds.lower : Scalar(0);
  return cert;
}

namespace detail {

/// Shared core of the transformed-pair checks: given d = min_K d(F_K, G_{K^C}),
/// decides d > max(||T1-T2|| ||T1^-1||, ||T1-T2|| ||T2^-1||) and converts the
/// resulting distance bound for (T1 F, T2 G) into a frame lower bound.
template <typename Scalar>
Certificate<Scalar> transformed_pair_certificate(std::string theorem, const DiscretizedFrame<Scalar>& f,
                                                 const DiscretizedFrame<Scalar>& g, const Matrix<Scalar>& t1,
                                                 const Matrix<Scalar>& t2, Scalar distance, SweepMode mode) {
  using std::sqrt;
  const Scalar diff = op_norm(Matrix<Scalar>(t1 - t2));
  const auto sv1 = singular_values(t1);
  const auto sv2 = singular_values(t2);
  const Scalar norm1 = sv1(0), norm2 = sv2(0);
  const Scalar inv1 = Scalar(1) / sv1(sv1.size() - 1), inv2 = Scalar(1) / sv2(sv2.size() - 1);
  const Scalar threshold = std::max(diff * inv1, diff * inv2);
  const Scalar d1 = std::clamp((distance / inv1 - diff) / norm2, Scalar(0), Scalar(1));
  const Scalar d2 = std::clamp((distance / inv2 - diff) / norm1, Scalar(0), Scalar(1));
  const Scalar d2_printed = (distance / inv2 - diff) / norm2;
  const Scalar guaranteed_distance = std::min(d1, d2);

  const Scalar lower1 = riesz_bounds(apply_operator(t1, f)).lower;
  const Scalar lower2 = riesz_bounds(apply_operator(t2, g)).lower;
  // Riesz sequences in subspaces at angle theta: union lower bound >= (1 - cos theta) min(lower1, lower2).
  const Scalar one_minus_cos =
      guaranteed_distance * guaranteed_distance / (Scalar(1) + sqrt(Scalar(1) - guaranteed_distance * guaranteed_distance));

  Certificate<Scalar> cert;
  cert.theorem = std::move(theorem);
  cert.premise_mode = mode.is_exhaustive() ? PremiseMode::Certified : PremiseMode::Sampled;
  cert.hypothesis_values = {{"d_min", distance},
                            {"norm_T1_minus_T2", diff},
                            {"norm_T1_inv", inv1},
                            {"norm_T2_inv", inv2},
                            {"norm_T1", norm1},
                            {"norm_T2", norm2},
                            {"threshold", threshold},
                            {"d1", d1},
                            {"d2", d2},
                            {"d2_printed", d2_printed},
                            {"guaranteed_distance", guaranteed_distance},
                            {"riesz_lower_T1F", lower1},
                            {"riesz_lower_T2G", lower2}};
  cert.hypothesis_satisfied = strictly_less(threshold, distance) && guaranteed_distance > Scalar(0);
  cert.guaranteed_lower = cert.hypothesis_satisfied ? one_minus_cos * std::min(lower1, lower2) : Scalar(0);
  return cert;
}

}  // namespace detail

/// T1 F and T2 G woven when F, G are woven Riesz bases and
/// d_min > max(||T1-T2|| ||T1^-1||, ||T1-T2|| ||T2^-1||).
template <typename Scalar, typename D1, typename D2>
Certificate<Scalar> invertible_pair_weaving_check(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                                  const Eigen::MatrixBase<D1>& t1, const Eigen::MatrixBase<D2>& t2,
                                                  SweepMode mode) {
  detail::require_operator<Scalar>(t1, f.dim(), "T1");
  detail::require_operator<Scalar>(t2, f.dim(), "T2");
  RieszCriterion<Scalar> criterion;
  try {
    criterion = riesz_weaving_criterion(f, g, mode);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotRieszBasis) throw Error(ErrorCode::NotWovenRieszBases, e.what());
    throw;
  }
  if (!criterion.woven) throw Error(ErrorCode::NotWovenRieszBases, "F and G are not woven (minimum distance is zero)");
  return detail::transformed_pair_certificate<Scalar>("invertible-pair", f, g, Matrix<Scalar>(t1), Matrix<Scalar>(t2),
                                                      criterion.min_distance, mode);
}

/// Canonical duals S_F^-1 F and S_G^-1 G woven under
/// d_min > max(||S_F^-1 - S_G^-1|| ||S_F||, ||S_F^-1 - S_G^-1|| ||S_G||).
template <typename Scalar>
Certificate<Scalar> canonical_duals_pair_check(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                               SweepMode mode) {
  if (!is_riesz_basis(f)) throw Error(ErrorCode::NotRieszBasis, "first family is not a Riesz basis");
  if (!is_riesz_basis(g)) throw Error(ErrorCode::NotRieszBasis, "second family is not a Riesz basis");
  const auto criterion = riesz_weaving_criterion(f, g, mode);
  const auto sf = detail::frame_spectra(f);
  const auto sg = detail::frame_spectra(g);
  auto cert = detail::transformed_pair_certificate<Scalar>("canonical-duals-pair", f, g, sf.s_inv, sg.s_inv,
                                                           criterion.min_distance, mode);
  cert.hypothesis_values["norm_S_F"] = sf.bounds.upper;
  cert.hypothesis_values["norm_S_G"] = sg.bounds.upper;
  return cert;
}

/// Caller-supplied constants for ||sum a_k (F_k - G_k)|| <= a||T_F a|| + b||T_G a|| + c||a||.
template <typename Scalar>
struct PerturbationConstants {
  Scalar a = 0;
  Scalar b = 0;
  Scalar c = 0;
};

namespace detail {

template <typename Scalar>
Certificate<Scalar> perturbation_certificate(std::string theorem, const DiscretizedFrame<Scalar>& f,
                                             const DiscretizedFrame<Scalar>& g, PerturbationConstants<Scalar> k,
                                             bool premise_holds, PremiseMode premise_mode, Scalar difference_norm) {
  using std::sqrt;
  const auto bf = frame_bounds(f);
  const auto bg = frame_bounds(g);
  const Scalar lhs = k.a * sqrt(bf.upper) + k.b * sqrt(bg.upper) + k.c;
  Certificate<Scalar> cert;
  cert.theorem = std::move(theorem);
  cert.premise_mode = premise_mode;
  cert.hypothesis_values = {{"a", k.a},
                            {"b", k.b},
                            {"c", k.c},
                            {"A_F", bf.lower},
                            {"B_F", bf.upper},
                            {"B_G", bg.upper},
                            {"sqrt_A_F", sqrt(bf.lower)},
                            {"perturbation_sum", lhs},
                            {"difference_norm", difference_norm},
                            {"premise_holds", premise_holds ? Scalar(1) : Scalar(0)}};
  cert.hypothesis_satisfied = premise_holds && bf.is_frame() && strictly_less(lhs, sqrt(bf.lower));
  const Scalar root = sqrt(bf.lower) - lhs;
  cert.guaranteed_lower = cert.hypothesis_satisfied ? root * root : Scalar(0);
  return cert;
}

}  // namespace detail

/// Weighted-synthesis operator norm of the difference family {F_k - G_k}.
template <typename Scalar>
Scalar difference_synthesis_norm(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g) {
  detail::require_compatible(f, g, "difference_synthesis_norm");
  return op_norm(Matrix<Scalar>((f.atoms() - g.atoms()) * f.weights().cwiseSqrt().asDiagonal()));
}

/// Without constants, uses a = b = 0 and c = the exact difference norm
/// (certified premise). Supplied constants are checked on seeded random
/// coefficient vectors and reported as sampled.
template <typename Scalar>
Certificate<Scalar> perturbation_weaving_check(const DiscretizedFrame<Scalar>& f, const DiscretizedFrame<Scalar>& g,
                                               std::optional<PerturbationConstants<Scalar>> constants = std::nullopt,
                                               std::uint64_t seed = 0) {
  detail::require_compatible(f, g, "perturbation_weaving_check");
  const Scalar difference_norm = difference_synthesis_norm(f, g);
  if (!constants) {
    return detail::perturbation_certificate<Scalar>("perturbation", f, g, {Scalar(0), Scalar(0), difference_norm}, true,
                                                    PremiseMode::Certified, difference_norm);
  }
  const auto k = *constants;
  if (!(k.a >= 0 && k.b >= 0 && k.c >= 0)) throw Error(ErrorCode::BadParams, "a, b, c must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector<Scalar> alpha(f.size());
  const Matrix<Scalar> diff = f.atoms() - g.atoms();
  std::size_t violations = 0;
  for (std::size_t s = 0; s < kPremiseSamples; ++s) {
    for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha(i) = Scalar(normal(rng));
    const Vector<Scalar> wa = f.weights().cwiseProduct(alpha);
    const Scalar lhs = (diff * wa).norm();
    const Scalar rhs = k.a * (f.atoms() * wa).norm() + k.b * (g.atoms() * wa).norm() +
                       k.c * std::sqrt(weighted_norm_squared(f, alpha));
    if (lhs > rhs + Scalar(kHypothesisSlack) * std::max(Scalar(1), rhs)) ++violations;
  }
  auto cert = detail::perturbation_certificate<Scalar>("perturbation", f, g, k, violations == 0, PremiseMode::Sampled,
                                                       difference_norm);
  cert.hypothesis_values["premise_samples"] = Scalar(kPremiseSamples);
  cert.hypothesis_values["premise_violations"] = Scalar(violations);
  return cert;
}

/// G = {F_k + a_k f}, woven with F when sum_k w_k a_k^2 < b A_F / ||f||^2 for some b < 1.
template <typename Scalar, typename DF, typename DC>
Construction<Scalar> rank_one_perturbation(const DiscretizedFrame<Scalar>& frame, const Eigen::MatrixBase<DF>& direction,
                                           const Eigen::MatrixBase<DC>& coeffs, Scalar budget_fraction) {
  using std::sqrt;
  if (direction.size() != frame.dim()) throw Error(ErrorCode::DimensionMismatch, "perturbation vector has wrong length");
  if (coeffs.size() != frame.size()) throw Error(ErrorCode::DimensionMismatch, "coefficient count must equal atom count");
  const Scalar fnorm2 = direction.squaredNorm();
  if (!(fnorm2 > Scalar(0))) throw Error(ErrorCode::ZeroVector, "perturbation vector must be non-zero");
  if (!(budget_fraction > Scalar(0) && budget_fraction < Scalar(1))) {
    throw Error(ErrorCode::BadParams, "b must lie in (0, 1)");
  }
  const auto bounds = frame_bounds(frame);
  const Scalar energy = weighted_norm_squared(frame, coeffs);
  const Scalar limit = budget_fraction * bounds.lower / fnorm2;

  const Matrix<Scalar> atoms = frame.atoms() + direction * coeffs.transpose();
  DiscretizedFrame<Scalar> g = frame.with_atoms(atoms, "rank-one perturbation");
  // Cauchy-Schwarz is tight for a rank-one difference: c = ||a||_w ||f||.
  const Scalar c = sqrt(energy * fnorm2);
  auto cert = detail::perturbation_certificate<Scalar>("rank-one-perturbation", frame, g, {Scalar(0), Scalar(0), c}, true,
                                                       PremiseMode::Certified, difference_synthesis_norm(frame, g));
  cert.hypothesis_values["coefficient_energy"] = energy;
  cert.hypothesis_values["energy_limit"] = limit;
  cert.hypothesis_values["b"] = budget_fraction;
  cert.hypothesis_values["sqrt_b_A_F"] = sqrt(budget_fraction * bounds.lower);
  if (!strictly_less(energy, limit)) {
    cert.hypothesis_satisfied = false;
    cert.guaranteed_lower = 0;
    throw CertificateError<Scalar>(ErrorCode::BudgetExceeded, "sum w_k a_k^2 < b A_F / ||f||^2 does not hold", cert);
  }
  return {std::move(g), std::move(cert)};
}

/// Operator T with T^* e_i = sum_j sqrt(a_j / b_j) <e_i, h_j> h_j for
/// orthonormal bases e, h given as columns.
template <typename Scalar, typename DE, typename DH>
Matrix<Scalar> build_admissible_operator(const Eigen::MatrixBase<DE>& e, const Eigen::MatrixBase<DH>& h,
                                         const Vector<Scalar>& a, const Vector<Scalar>& b) {
  const Eigen::Index m = e.rows();
  auto check_basis = [m](const auto& basis, const char* name) {
    if (basis.rows() != m || basis.cols() != m) throw Error(ErrorCode::NotOrthonormal, std::string(name) + " must be m x m");
    const Matrix<Scalar> gram = basis.transpose() * basis;
    if ((gram - Matrix<Scalar>::Identity(m, m)).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
      throw Error(ErrorCode::NotOrthonormal, std::string(name) + " is not orthonormal");
    }
  };
  check_basis(e, "e");
  check_basis(h, "h");
  if (a.size() != m || b.size() != m) throw Error(ErrorCode::BadScalars, "a and b need one entry per basis vector");
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(a(j) > Scalar(0)) || !(b(j) > Scalar(0)) || !std::isfinite(static_cast<double>(a(j) / b(j)))) {
      throw Error(ErrorCode::BadScalars, "a and b must be positive and finite");
    }
  }
  const Vector<Scalar> ratio = (a.array() / b.array()).sqrt().matrix();
  const Matrix<Scalar> adjoint = h * ratio.asDiagonal() * h.transpose();
  // T^* agrees with `adjoint` on the basis e, hence everywhere.
  const Matrix<Scalar> t_adjoint = adjoint * e * e.transpose();
  return t_adjoint.transpose();
}

template <typename Scalar>
struct AdmissibleWeaving {
  /// ||S_TF - T S_F T^*|| / (||S_F|| ||T||^2).
  Scalar operator_residual;
  WeavingReport<Scalar> report;
};

template <typename Scalar, typename Derived>
AdmissibleWeaving<Scalar> admissible_weaving(const DiscretizedFrame<Scalar>& f, const Eigen::MatrixBase<Derived>& t,
                                             SweepMode mode) {
  const Matrix<Scalar> tm = t;
  const auto tf = apply_operator(tm, f, "TF");
  const Matrix<Scalar> s = frame_operator(f);
  const Scalar tn = op_norm(tm);
  const Scalar residual = op_norm(Matrix<Scalar>(frame_operator(tf) - tm * s * tm.transpose())) / (op_norm(s) * tn * tn);
  return {residual, weaving_bounds(f, tf, mode)};
}

/// F and c F are woven with lower bound min(1, c^2) A_F and upper (1 + c^2) B_F.
template <typename Scalar>
Certificate<Scalar> scaled_copy_weaving_check(const DiscretizedFrame<Scalar>& f, Scalar factor) {
  const auto bounds = frame_bounds(f);
  Certificate<Scalar> cert;
  cert.theorem = "scaled-copy";
  cert.premise_mode = PremiseMode::Certified;
  const Scalar f2 = factor * factor;
  cert.hypothesis_values = {{"A_F", bounds.lower}, {"B_F", bounds.upper}, {"factor", factor},
                            {"upper_bound", (Scalar(1) + f2) * bounds.upper}};
  cert.hypothesis_satisfied = bounds.is_frame() && f2 > Scalar(0);
  cert.guaranteed_lower = cert.hypothesis_satisfied ? std::min(Scalar(1), f2) * bounds.lower : Scalar(0);
  return cert;
}

}  // namespace woven
