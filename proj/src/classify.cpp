#include "condop/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "condop/errors.hpp"

namespace condop {

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::yes: return "yes";
    case Status::no: return "no";
    case Status::indeterminate: return "indeterminate";
  }
  return "?";
}

namespace {

void require_tau(double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("criterion tolerance must be >= 0");
}

/// Pointwise test of lhs = rhs for nonnegative quantities bounded by a
/// common scale. Holds when the defect is within tau * max(lhs, rhs), or
/// both sides are below `floor`.
struct PointwiseIdentity {
  std::vector<std::size_t> failures;
  std::vector<double> defect;  // relative, per point
  double max_defect = 0.0;
};

PointwiseIdentity test_identity(const std::vector<double>& lhs,
                                const std::vector<double>& rhs, double tau,
                                double floor) {
  PointwiseIdentity out;
  out.defect.assign(lhs.size(), 0.0);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double big = std::max(std::abs(lhs[i]), std::abs(rhs[i]));
    if (big <= floor) continue;
    const double rel = std::abs(lhs[i] - rhs[i]) / big;
    out.defect[i] = rel;
    out.max_defect = std::max(out.max_defect, rel);
    if (rel > tau) out.failures.push_back(i);
  }
  return out;
}

/// |E(uw)|^2 against E|u|^2 E|w|^2.
PointwiseIdentity cauchy_schwarz_identity(const CondOpSpec& spec, double tau,
                                          double supp_tol) {
  const auto n = spec.size();
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = std::norm(spec.e_uw()[i]);
    rhs[i] = spec.e_abs_u2()[i].real() * spec.e_abs_w2()[i].real();
  }
  const double t = supp_tol * norm_formula(spec);
  return test_identity(lhs, rhs, tau, t * t);
}

bool is_unit_weight(const CFun& w) {
  return std::all_of(w.begin(), w.end(),
                     [](cplx z) { return std::abs(z - 1.0) <= 1e-12; });
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& pts,
                                   const SupportSet& s) {
  std::vector<std::size_t> out;
  for (const auto i : pts) {
    if (s.contains(i)) out.push_back(i);
  }
  return out;
}

double max_over(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  double m = 0.0;
  for (const auto i : idx) m = std::max(m, v[i]);
  return m;
}

CriterionVerdict three_valued(const PointwiseIdentity& id,
                              const SupportSet& necessary,
                              const char* sufficient_id,
                              const char* necessary_id, const char* gap_id) {
  CriterionVerdict v;
  if (id.failures.empty()) {
    v.status = Status::yes;
    v.criterion_id = sufficient_id;
    v.residual = id.max_defect;
    return v;
  }
  auto on = intersect(id.failures, necessary);
  if (!on.empty()) {
    v.status = Status::no;
    v.criterion_id = necessary_id;
    v.residual = max_over(id.defect, on);
    v.witness = std::move(on);
    return v;
  }
  v.status = Status::indeterminate;
  v.criterion_id = gap_id;
  v.residual = max_over(id.defect, id.failures);
  v.witness = id.failures;
  return v;
}

}  // namespace

CenteredSupports centered_supports(const CondOpSpec& spec, double supp_tol) {
  const auto h = derived_support(spec, Derived::e_uw, supp_tol);
  const auto eu = derived_support(spec, Derived::e_u, supp_tol);
  const auto ew = derived_support(spec, Derived::e_w, supp_tol);
  const auto s = derived_support(spec, Derived::e_abs_u2, supp_tol);
  const auto g = derived_support(spec, Derived::e_abs_w2, supp_tol);
  CenteredSupports out{h & eu & ew, h, eu & ew, s & g, false};
  out.iff_hypothesis =
      out.eu_ew.same_members(out.s_cap_g) && out.s_cap_g.same_members(out.h);
  return out;
}

CriterionVerdict centered_closed_form(const CondOpSpec& spec, double tau,
                                      double supp_tol) {
  require_tau(tau);
  const auto id = cauchy_schwarz_identity(spec, tau, supp_tol);
  const auto supports = centered_supports(spec, supp_tol);
  return three_valued(id, supports.necessary, "cauchy_schwarz_equality",
                      "necessary_on_support", "gap_off_support");
}

CriterionVerdict centered_eu_special(const CondOpSpec& spec, double tau,
                                     double supp_tol) {
  require_tau(tau);
  if (!is_unit_weight(spec.w())) {
    throw ArgumentError("centered_eu_special requires w identically 1");
  }
  const auto n = spec.size();
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = std::norm(spec.e_u()[i]);
    rhs[i] = spec.e_abs_u2()[i].real();
  }
  const auto id = test_identity(lhs, rhs, tau, supp_tol * supp_tol * spec.scale(Derived::e_abs_u2));
  const auto seu = derived_support(spec, Derived::e_u, supp_tol);
  const auto s = derived_support(spec, Derived::e_abs_u2, supp_tol);
  if (seu.same_members(s)) {
    // Under S(E(u)) = S(E|u|^2) the test is an iff: u block-constant.
    return three_valued(id, seu, "block_constant_iff", "block_constant_iff",
                        "block_constant_iff");
  }
  return three_valued(id, seu, "mean_modulus_equality",
                      "necessary_on_mean_support", "gap_off_mean_support");
}

CriterionVerdict normal_closed_form(const CondOpSpec& spec, double tau,
                                    double supp_tol) {
  require_tau(tau);
  const auto n = spec.size();
  if (is_unit_weight(spec.w())) {
    // E M_u is normal iff u is block-constant; E|u|^2 - |E(u)|^2 is the
    // block variance of u.
    std::vector<double> lhs(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      lhs[i] = std::norm(spec.e_u()[i]);
      rhs[i] = spec.e_abs_u2()[i].real();
    }
    const auto id =
        test_identity(lhs, rhs, tau, supp_tol * supp_tol * spec.scale(Derived::e_abs_u2));
    CriterionVerdict v;
    v.criterion_id = "multiplier_block_constant";
    if (id.failures.empty()) {
      v.status = Status::yes;
      v.residual = id.max_defect;
    } else {
      v.status = Status::no;
      v.witness = id.failures;
      v.residual = max_over(id.defect, id.failures);
    }
    return v;
  }

  // Sufficient: (E|u|^2)^(1/2) conj(w) = u (E|w|^2)^(1/2).
  std::vector<double> defect_a(n, 0.0);
  double scale_a = 0.0;
  std::vector<double> size_a(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double su = std::sqrt(std::max(spec.e_abs_u2()[i].real(), 0.0));
    const double sw = std::sqrt(std::max(spec.e_abs_w2()[i].real(), 0.0));
    const cplx lhs = su * std::conj(spec.w()[i]);
    const cplx rhs = spec.u()[i] * sw;
    defect_a[i] = std::abs(lhs - rhs);
    size_a[i] = std::max(std::abs(lhs), std::abs(rhs));
    scale_a = std::max(scale_a, size_a[i]);
  }
  bool holds_a = true;
  double max_rel_a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (size_a[i] <= supp_tol * scale_a) continue;
    const double rel = defect_a[i] / size_a[i];
    max_rel_a = std::max(max_rel_a, rel);
    if (rel > tau) holds_a = false;
  }
  if (holds_a) {
    return {Status::yes, {}, "modulus_balance", max_rel_a};
  }

  // Necessary: |E(u)|^2 E|w|^2 = |E(w)|^2 E|u|^2.
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = std::norm(spec.e_u()[i]) * spec.e_abs_w2()[i].real();
    rhs[i] = std::norm(spec.e_w()[i]) * spec.e_abs_u2()[i].real();
  }
  const double t = supp_tol * norm_formula(spec);
  const auto id = test_identity(lhs, rhs, tau, t * t);
  if (!id.failures.empty()) {
    return {Status::no, id.failures, "necessary_moment_balance",
            max_over(id.defect, id.failures)};
  }
  return {Status::indeterminate, {}, "between_clauses", max_rel_a};
}

OracleVerdict centered_oracle(const CondOpSpec& spec, int depth, double tol) {
  const auto check = oracle::commuting_family_check(oracle::materialize(spec),
                                                    depth, tol);
  return {check.passed, check.max_residual};
}

OracleVerdict normal_oracle(const CondOpSpec& spec, double tol) {
  const double r = oracle::normality_residual(oracle::materialize(spec));
  return {r <= tol, r};
}

EquivalenceReport equivalence_suite(const CondOpSpec& spec,
                                    const EquivalenceOptions& opts) {
  if (!is_unit_weight(spec.w())) {
    throw ArgumentError("equivalence_suite requires w identically 1");
  }
  const auto seu = derived_support(spec, Derived::e_u, opts.supp_tol);
  const auto s = derived_support(spec, Derived::e_abs_u2, opts.supp_tol);
  if (!seu.same_members(s)) {
    throw ArgumentError(
        "equivalence_suite: S(E(u)) != S(E|u|^2) (" +
        std::to_string(seu.count()) + " vs " + std::to_string(s.count()) +
        " points); the equivalence is only claimed when they coincide");
  }
  EquivalenceReport r;
  r.centered_closed = centered_eu_special(spec, opts.tau, opts.supp_tol);
  r.normal_closed = normal_closed_form(spec, opts.tau, opts.supp_tol);
  r.centered_oracle = centered_oracle(spec, opts.depth, opts.family_tol);
  r.normal_oracle = normal_oracle(spec, opts.normal_tol);
  const double tol_abs =
      std::sqrt(opts.tau) * std::sqrt(spec.scale(Derived::e_abs_u2));
  r.block_constant =
      is_algebra_measurable(spec.u(), spec.partition(), spec.space(), tol_abs);

  const bool truth = r.block_constant;
  bool agree = r.centered_oracle.holds == truth && r.normal_oracle.holds == truth;
  for (const auto* v : {&r.centered_closed, &r.normal_closed}) {
    if (v->status == Status::indeterminate) continue;
    agree = agree && ((v->status == Status::yes) == truth);
  }
  r.agree = agree;
  return r;
}

namespace {

std::vector<cplx> cluster_values(std::vector<cplx> values, double tol) {
  std::sort(values.begin(), values.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<cplx> out;
  for (const auto v : values) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](cplx o) {
      return std::abs(o - v) <= tol;
    });
    if (!seen) out.push_back(v);
  }
  return out;
}

double one_sided(const std::vector<cplx>& from, const std::vector<cplx>& to) {
  double worst = 0.0;
  for (const auto a : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto b : to) best = std::min(best, std::abs(a - b));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

SpectrumReport point_spectrum_formula(const CondOpSpec& spec,
                                      const SpectrumOptions& opts) {
  require_tau(opts.tau);
  SpectrumReport r;
  const double nt = norm_formula(spec);
  const auto h = derived_support(spec, Derived::e_uw, opts.supp_tol);
  std::vector<cplx> levels;
  for (const auto i : h.members()) levels.push_back(spec.e_uw()[i]);
  r.nonzero_level_values = cluster_values(std::move(levels), opts.cluster_tol * nt);

  const auto a = oracle::materialize(spec);
  const auto clusters =
      oracle::eigensolve(a, {opts.eig_tol, opts.cluster_tol, 256});
  std::vector<cplx> nonzero;
  for (const auto& c : clusters) {
    r.eigenvalues.push_back({c.value, c.multiplicity, false, 0.0});
    if (std::abs(c.value) > opts.zero_tol * nt) nonzero.push_back(c.value);
  }
  r.nonzero_eigenvalues = cluster_values(std::move(nonzero), opts.cluster_tol * nt);

  if (r.nonzero_eigenvalues.empty() != r.nonzero_level_values.empty()) {
    r.set_distance = std::numeric_limits<double>::infinity();
  } else if (nt > 0.0) {
    r.set_distance =
        std::max(one_sided(r.nonzero_eigenvalues, r.nonzero_level_values),
                 one_sided(r.nonzero_level_values, r.nonzero_eigenvalues)) /
        nt;
  }
  r.sets_match = r.set_distance <= opts.cluster_tol;
  r.equality_case =
      cauchy_schwarz_identity(spec, opts.tau, opts.supp_tol).failures.empty();
  return r;
}

SpectrumReport joint_spectrum_check(const CondOpSpec& spec,
                                    const SpectrumOptions& opts) {
  SpectrumReport r = point_spectrum_formula(spec, opts);
  const auto a = oracle::materialize(spec);
  const auto clusters =
      oracle::eigensolve(a, {opts.eig_tol, opts.cluster_tol, 256});
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const double res = oracle::joint_residual(a, clusters[k]);
    r.eigenvalues[k].joint_residual = res;
    r.eigenvalues[k].joint = res <= opts.joint_tol;
  }
  return r;
}

}  // namespace condop
