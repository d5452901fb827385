#include "condop/condop_core.hpp"

#include <algorithm>
#include <cmath>

#include "condop/errors.hpp"

namespace condop {

CondOpSpec::CondOpSpec(MeasureSpace space, Partition partition, CFun u, CFun w)
    : space_(std::move(space)),
      partition_(std::move(partition)),
      u_(std::move(u)),
      w_(std::move(w)) {
  const auto n = space_.size();
  if (partition_.point_count() != n || u_.size() != n || w_.size() != n) {
    throw StructuralError(
        "conditional operator: space has " + std::to_string(n) +
        " points, partition " + std::to_string(partition_.point_count()) +
        ", u " + std::to_string(u_.size()) + ", w " +
        std::to_string(w_.size()));
  }
  e_abs_u2_ = cond_expect(u_.abs2(), partition_, space_);
  e_abs_w2_ = cond_expect(w_.abs2(), partition_, space_);
  e_uw_ = cond_expect(u_ * w_, partition_, space_);
  e_u_ = cond_expect(u_, partition_, space_);
  e_w_ = cond_expect(w_, partition_, space_);
}

const CFun& CondOpSpec::derived(Derived q) const {
  switch (q) {
    case Derived::e_abs_u2: return e_abs_u2_;
    case Derived::e_abs_w2: return e_abs_w2_;
    case Derived::e_uw: return e_uw_;
    case Derived::e_u: return e_u_;
    case Derived::e_w: return e_w_;
  }
  return e_uw_;
}

double CondOpSpec::scale(Derived q) const {
  const double mu2 = e_abs_u2_.max_abs();
  const double mw2 = e_abs_w2_.max_abs();
  switch (q) {
    case Derived::e_abs_u2: return mu2;
    case Derived::e_abs_w2: return mw2;
    case Derived::e_uw: return norm_formula(*this);
    case Derived::e_u: return std::sqrt(mu2);
    case Derived::e_w: return std::sqrt(mw2);
  }
  return 0.0;
}

SupportSet derived_support(const CondOpSpec& spec, Derived q, double supp_tol) {
  if (!(supp_tol >= 0.0)) throw ArgumentError("support tolerance must be >= 0");
  return support_of(spec.derived(q), supp_tol * spec.scale(q));
}

CFun apply_form(const MultiplierForm& form, const Partition& p,
                const MeasureSpace& m, const CFun& f) {
  if (f.size() != m.size()) {
    throw StructuralError("function has " + std::to_string(f.size()) +
                          " values, space has " + std::to_string(m.size()));
  }
  return form.outer * cond_expect(form.inner * f, p, m);
}

CFun apply(const CondOpSpec& spec, const CFun& f) {
  return apply_form(spec.form(), spec.partition(), spec.space(), f);
}

CFun adjoint_apply(const CondOpSpec& spec, const CFun& f) {
  return apply_form(spec.adjoint_form(), spec.partition(), spec.space(), f);
}

CFun power_apply(const CondOpSpec& spec, int n, const CFun& f) {
  if (n < 1) throw ArgumentError("power_apply: n must be >= 1");
  const CFun tf = apply(spec, f);
  std::vector<cplx> out(tf.size());
  for (std::size_t i = 0; i < tf.size(); ++i) {
    out[i] = std::pow(spec.e_uw()[i], n - 1) * tf[i];
  }
  return CFun(std::move(out));
}

double norm_formula(const CondOpSpec& spec) {
  double best = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double prod = spec.e_abs_w2()[i].real() * spec.e_abs_u2()[i].real();
    best = std::max(best, std::sqrt(std::max(prod, 0.0)));
  }
  return best;
}

MultiplierForm positive_power_form(const CondOpSpec& spec, double p, Side side,
                                   double supp_tol) {
  if (!(p > 0.0)) throw ArgumentError("positive_power: p must be > 0");
  const auto n = spec.size();
  // star_t: (T*T)^p = M_{conj u (E|u|^2)^(p-1) chi_S (E|w|^2)^p} E M_u
  // t_star: (TT*)^p = M_{w (E|w|^2)^(p-1) chi_G (E|u|^2)^p} E M_{conj w}
  const bool star = side == Side::star_t;
  const CFun& own = star ? spec.e_abs_u2() : spec.e_abs_w2();
  const CFun& other = star ? spec.e_abs_w2() : spec.e_abs_u2();
  const SupportSet supp = derived_support(
      spec, star ? Derived::e_abs_u2 : Derived::e_abs_w2, supp_tol);
  const CFun lead = star ? spec.u().conj() : spec.w();

  std::vector<cplx> outer(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!supp.contains(i)) continue;
    const double a = own[i].real();
    const double b = std::max(other[i].real(), 0.0);
    outer[i] = lead[i] * std::pow(a, p - 1.0) * std::pow(b, p);
  }
  return {CFun(std::move(outer)), star ? spec.u() : spec.w().conj()};
}

CFun positive_power(const CondOpSpec& spec, double p, Side side, const CFun& f,
                    double supp_tol) {
  return apply_form(positive_power_form(spec, p, side, supp_tol),
                    spec.partition(), spec.space(), f);
}

PolarParts polar_parts(const CondOpSpec& spec, double supp_tol) {
  const auto n = spec.size();
  const SupportSet s = derived_support(spec, Derived::e_abs_u2, supp_tol);
  const SupportSet g = derived_support(spec, Derived::e_abs_w2, supp_tol);

  std::vector<cplx> modulus(n, 0.0);
  std::vector<cplx> isometry(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double eu = spec.e_abs_u2()[i].real();
    const double ew = std::max(spec.e_abs_w2()[i].real(), 0.0);
    if (s.contains(i)) {
      modulus[i] = std::sqrt(ew / eu) * std::conj(spec.u()[i]);
      if (g.contains(i)) {
        isometry[i] = spec.w()[i] / std::sqrt(ew * eu);
      }
    }
  }
  return {{CFun(std::move(modulus)), spec.u()},
          {CFun(std::move(isometry)), spec.u()}};
}

MultiplierForm aluthge_form(const CondOpSpec& spec, double supp_tol) {
  const auto n = spec.size();
  const SupportSet s = derived_support(spec, Derived::e_abs_u2, supp_tol);
  std::vector<cplx> outer(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.contains(i)) continue;
    outer[i] = spec.e_uw()[i] / spec.e_abs_u2()[i].real() *
               std::conj(spec.u()[i]);
  }
  return {CFun(std::move(outer)), spec.u()};
}

CFun aluthge_apply(const CondOpSpec& spec, const CFun& f, double supp_tol) {
  return apply_form(aluthge_form(spec, supp_tol), spec.partition(),
                    spec.space(), f);
}

}  // namespace condop
