#pragma once

#include <optional>
#include <string>
#include <vector>

#include "condop/condop_core.hpp"
#include "condop/matrix_oracle.hpp"

namespace condop {

enum class Status { yes, no, indeterminate };

const char* to_string(Status s) noexcept;

/// Outcome of a closed-form criterion.
///
/// The sufficient and necessary clauses of the centered/normal characterizations
/// differ on support sets, so a criterion may be unable to decide; that case
/// is `indeterminate` and must be settled by a brute-force oracle.
struct CriterionVerdict {
  Status status = Status::indeterminate;
  /// Points where the decisive identity fails (non-empty when status == no).
  std::vector<std::size_t> witness;
  /// Which clause fired.
  std::string criterion_id;
  /// Largest relative defect of the identity that was tested.
  double residual = 0.0;
};

struct CenteredSupports {
  /// S(E(uw) E(w) E(u)): where the necessary clause applies.
  SupportSet necessary;
  /// H = S(E(uw)).
  SupportSet h;
  /// S(E(u) E(w)) and S cap G, for the "S(E(u)E(w)) = S cap G = H" test.
  SupportSet eu_ew;
  SupportSet s_cap_g;
  /// True when S(E(u)E(w)) = S cap G = H; then the criterion is an iff.
  bool iff_hypothesis = false;
};

CenteredSupports centered_supports(const CondOpSpec& spec,
                                   double supp_tol = kDefaultSuppTol);

/// Centeredness of M_w E M_u from |E(uw)|^2 = E|u|^2 E|w|^2.
///   yes            identity holds at every point;
///   no             identity fails somewhere on S(E(uw)E(w)E(u));
///   indeterminate  identity fails only off that support.
/// `tau` is relative: the identity holds at x when the defect is at most
/// tau * E|u|^2 E|w|^2 (x), or when both sides are below supp_tol.
CriterionVerdict centered_closed_form(const CondOpSpec& spec, double tau,
                                      double supp_tol = kDefaultSuppTol);

/// Specialization for w = 1 (operators E M_u): |E(u)|^2 = E|u|^2, necessary on
/// S(E(u)); when S(E(u)) = S(E|u|^2) the answer is "u is block-constant".
/// Throws ArgumentError when w is not identically 1.
CriterionVerdict centered_eu_special(const CondOpSpec& spec, double tau,
                                     double supp_tol = kDefaultSuppTol);

/// Normality of M_w E M_u.
///   yes  (E|u|^2)^(1/2) conj(w) = u (E|w|^2)^(1/2) pointwise, or w = 1 and
///        u is block-constant;
///   no   |E(u)|^2 E|w|^2 != |E(w)|^2 E|u|^2 somewhere, or w = 1 and u is not
///        block-constant.
CriterionVerdict normal_closed_form(const CondOpSpec& spec, double tau,
                                    double supp_tol = kDefaultSuppTol);

/// Brute-force settlement of centeredness / normality on the dense matrix.
struct OracleVerdict {
  bool holds = false;
  double residual = 0.0;
};

OracleVerdict centered_oracle(const CondOpSpec& spec, int depth, double tol);
OracleVerdict normal_oracle(const CondOpSpec& spec, double tol);

/// For w = 1 with S(E(u)) = S(E|u|^2): centered, normal and "u bounded and
/// block-constant" evaluated independently (closed forms and oracles).
struct EquivalenceReport {
  CriterionVerdict centered_closed;
  CriterionVerdict normal_closed;
  OracleVerdict centered_oracle;
  OracleVerdict normal_oracle;
  bool block_constant = false;
  /// All five predicates agree.
  bool agree = false;
};

struct EquivalenceOptions {
  double tau = 1e-9;
  double supp_tol = kDefaultSuppTol;
  int depth = 4;
  double family_tol = 1e-8;
  double normal_tol = 1e-8;
};

/// Throws ArgumentError when w != 1 or the support hypothesis fails.
EquivalenceReport equivalence_suite(const CondOpSpec& spec,
                                    const EquivalenceOptions& opts = {});

struct SpectralPoint {
  cplx value;
  int multiplicity = 0;
  /// True iff the eigenspace holds f with T*f = conj(value) f.
  bool joint = false;
  double joint_residual = 0.0;
};

struct SpectrumReport {
  /// Oracle eigenvalues with algebraic multiplicities (sum = n).
  std::vector<SpectralPoint> eigenvalues;
  /// Distinct values of E(uw) above the support threshold.
  std::vector<cplx> nonzero_level_values;
  /// Nonzero oracle eigenvalues, clustered.
  std::vector<cplx> nonzero_eigenvalues;
  /// Whether the two nonzero sets coincide within the clustering tolerance.
  bool sets_match = false;
  /// Largest distance from a value in one set to the nearest in the other,
  /// relative to ||T||.
  double set_distance = 0.0;
  /// |E(uw)|^2 = E|u|^2 E|w|^2 holds everywhere.
  bool equality_case = false;
};

struct SpectrumOptions {
  double supp_tol = kDefaultSuppTol;
  /// Relative tolerance of the equality test deciding `equality_case`.
  double tau = 1e-9;
  /// Oracle eigenvalues with |lambda| <= zero_tol * ||T|| count as zero.
  double zero_tol = 1e-7;
  double cluster_tol = 1e-8;
  /// Joint flag threshold on joint_residual.
  double joint_tol = 1e-8;
  double eig_tol = 1e-8;
};

/// Nonzero point spectrum = {lambda != 0 : mu(E(uw) = lambda) > 0}, compared
/// with the dense eigensolver.
SpectrumReport point_spectrum_formula(const CondOpSpec& spec,
                                      const SpectrumOptions& opts = {});

/// point_spectrum_formula plus joint flags for every eigenvalue.
SpectrumReport joint_spectrum_check(const CondOpSpec& spec,
                                    const SpectrumOptions& opts = {});

}  // namespace condop
