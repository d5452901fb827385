#pragma once

#include <cstddef>

#include "condop/measure_space.hpp"

namespace condop {

/// An operator of the shape f -> outer * E(inner * f) on a fixed space and
/// partition. T itself, T*, (T*T)^p, (TT*)^p, |T|, U and the Aluthge
/// transform all have this shape.
struct MultiplierForm {
  CFun outer;
  CFun inner;
};

/// Quantities derived from (u, w) whose supports enter the criteria.
enum class Derived { e_abs_u2, e_abs_w2, e_uw, e_u, e_w };

/// T = M_w E M_u on a finite measure space.
///
/// The block-constant functions E(|u|^2), E(|w|^2), E(uw), E(u), E(w) are
/// computed once at construction.
class CondOpSpec {
 public:
  CondOpSpec(MeasureSpace space, Partition partition, CFun u, CFun w);

  const MeasureSpace& space() const noexcept { return space_; }
  const Partition& partition() const noexcept { return partition_; }
  const CFun& u() const noexcept { return u_; }
  const CFun& w() const noexcept { return w_; }
  std::size_t size() const noexcept { return space_.size(); }

  const CFun& e_abs_u2() const noexcept { return e_abs_u2_; }
  const CFun& e_abs_w2() const noexcept { return e_abs_w2_; }
  const CFun& e_uw() const noexcept { return e_uw_; }
  const CFun& e_u() const noexcept { return e_u_; }
  const CFun& e_w() const noexcept { return e_w_; }
  const CFun& derived(Derived q) const;

  /// Natural magnitude of a derived quantity: its Cauchy-Schwarz bound.
  /// Support thresholds are taken relative to this.
  double scale(Derived q) const;

  MultiplierForm form() const { return {w_, u_}; }
  /// T* = M_{conj u} E M_{conj w}.
  MultiplierForm adjoint_form() const { return {u_.conj(), w_.conj()}; }

  bool operator==(const CondOpSpec& o) const {
    return space_ == o.space_ && partition_ == o.partition_ && u_ == o.u_ &&
           w_ == o.w_;
  }

 private:
  MeasureSpace space_;
  Partition partition_;
  CFun u_;
  CFun w_;
  CFun e_abs_u2_;
  CFun e_abs_w2_;
  CFun e_uw_;
  CFun e_u_;
  CFun e_w_;
};

/// Support of a derived quantity with threshold supp_tol * spec.scale(q).
SupportSet derived_support(const CondOpSpec& spec, Derived q,
                           double supp_tol = kDefaultSuppTol);

CFun apply_form(const MultiplierForm& form, const Partition& p,
                const MeasureSpace& m, const CFun& f);

/// Tf = w E(uf).
CFun apply(const CondOpSpec& spec, const CFun& f);
/// T*f = conj(u) E(conj(w) f).
CFun adjoint_apply(const CondOpSpec& spec, const CFun& f);

/// T^n f = E(uw)^(n-1) w E(uf), n >= 1.
CFun power_apply(const CondOpSpec& spec, int n, const CFun& f);

/// ||T|| = ess sup (E|w|^2 E|u|^2)^(1/2).
double norm_formula(const CondOpSpec& spec);

enum class Side { star_t, t_star };

/// (T*T)^p or (TT*)^p in multiplier form. Factors with a possibly negative
/// exponent are zeroed off S = S(E|u|^2) (resp. G = S(E|w|^2)).
MultiplierForm positive_power_form(const CondOpSpec& spec, double p, Side side,
                                   double supp_tol = kDefaultSuppTol);
CFun positive_power(const CondOpSpec& spec, double p, Side side, const CFun& f,
                    double supp_tol = kDefaultSuppTol);

/// T = U|T|: modulus |T| and partial isometry U.
struct PolarParts {
  MultiplierForm modulus;
  MultiplierForm isometry;
};

PolarParts polar_parts(const CondOpSpec& spec,
                       double supp_tol = kDefaultSuppTol);

/// Aluthge transform |T|^(1/2) U |T|^(1/2) in closed form:
/// f -> chi_S E(uw)/E|u|^2 conj(u) E(uf).
MultiplierForm aluthge_form(const CondOpSpec& spec,
                            double supp_tol = kDefaultSuppTol);
CFun aluthge_apply(const CondOpSpec& spec, const CFun& f,
                   double supp_tol = kDefaultSuppTol);

}  // namespace condop
