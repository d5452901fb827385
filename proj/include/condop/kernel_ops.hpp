#pragma once

#include <cstddef>
#include <vector>

#include "condop/classify.hpp"
#include "condop/condop_core.hpp"
#include "condop/matrix_oracle.hpp"

namespace condop {

/// An integral operator Tf(x) = sum_y k(x, y) f(y) mu(y) on a finite space.
class KernelSpec {
 public:
  /// `kernel` is row-major n x n.
  KernelSpec(MeasureSpace base, std::vector<cplx> kernel);

  const MeasureSpace& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.size(); }
  cplx k(std::size_t x, std::size_t y) const { return kernel_[x * size() + y]; }
  const std::vector<cplx>& kernel() const noexcept { return kernel_; }

  /// Row integrals r(x) = sum_y k(x, y) mu(y).
  std::vector<cplx> row_integrals() const;
  /// s(x) = sum_y |k(x, y)|^2 mu(y).
  std::vector<double> row_square_integrals() const;

  bool operator==(const KernelSpec&) const = default;

 private:
  MeasureSpace base_;
  std::vector<cplx> kernel_;
};

CFun kernel_apply(const KernelSpec& ks, const CFun& f);

/// (k, mu) -> (k mu(X), mu / mu(X)); kernel_apply is unchanged.
KernelSpec normalize_to_probability(const KernelSpec& ks);

/// Largest base size whose lift is built as an explicit CondOpSpec.
inline constexpr std::size_t kMaxExplicitLift = 64;

/// T as M_1 E M_k on X x X with the first-coordinate algebra. Point (x, y)
/// has index x * n + y and mass mu(x) mu(y); block x is the row {x} x X.
/// Requires mu(X) = 1 and n <= kMaxExplicitLift; larger kernels go through
/// LazyLift.
CondOpSpec lift_to_condop(const KernelSpec& ks);

/// The lifted operator evaluated through its defining formulas, without
/// building the n^2-point space.
class LazyLift {
 public:
  explicit LazyLift(KernelSpec ks);

  std::size_t base_size() const noexcept { return ks_.size(); }
  std::size_t size() const noexcept { return ks_.size() * ks_.size(); }
  /// Product-space measure of point (x, y).
  double weight(std::size_t point) const;

  /// (Tg)(x, y) = sum_t k(x, t) g(x, t) mu(t).
  CFun apply(const CFun& g) const;
  /// (T*g)(x, y) = conj(k(x, y)) sum_t g(x, t) mu(t).
  CFun adjoint_apply(const CFun& g) const;

  /// f'(x, y) = f(y).
  CFun embed(const CFun& f) const;
  /// g(., y).
  CFun restrict_to(const CFun& g, std::size_t y) const;

  const KernelSpec& kernel() const noexcept { return ks_; }

 private:
  KernelSpec ks_;
};

struct KernelBoundReport {
  /// s(x) = sum_y |k(x,y)|^2 mu(y): the a.e. finiteness witness, per row.
  std::vector<double> row_square_integrals;
  bool all_rows_finite = true;
  /// M = ess sup s.
  double row_sup = 0.0;
  /// ||lifted T|| = (M E|w|^2)^(1/2) = M^(1/2) since w = 1.
  double lifted_norm = 0.0;
};

KernelBoundReport kernel_bounded_report(const KernelSpec& ks);

/// Centeredness from |r(x)|^2 = s(x): yes when it holds on every row, no
/// when it fails on a row with r(x) != 0, indeterminate otherwise.
CriterionVerdict kernel_centered(const KernelSpec& ks, double tau,
                                 double supp_tol = kDefaultSuppTol);

/// Normality from |r(x)|^2 = s(x) on every row.
CriterionVerdict kernel_normal(const KernelSpec& ks, double tau,
                               double supp_tol = kDefaultSuppTol);

/// Matrix of the kernel operator on L^2(X, mu): entry (x, y) = k(x, y) mu(y).
oracle::DenseOperator kernel_matrix(const KernelSpec& ks);

/// Dense matrix of the lifted operator on L^2(X x X).
oracle::DenseOperator lifted_matrix(const KernelSpec& ks);

/// ||T*T - TT*|| / ||T||^2 for the lifted operator, from the n x n diagonal
/// blocks of the lift (one per row). Usable for any base size.
double lifted_normality_residual(const KernelSpec& ks);

}  // namespace condop
