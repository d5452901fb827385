#include "condop/kernel_ops.hpp"

#include <algorithm>
#include <cmath>

#include "condop/errors.hpp"
#include "condop/summation.hpp"

namespace condop {

KernelSpec::KernelSpec(MeasureSpace base, std::vector<cplx> kernel)
    : base_(std::move(base)), kernel_(std::move(kernel)) {
  if (kernel_.size() != base_.size() * base_.size()) {
    throw StructuralError("kernel has " + std::to_string(kernel_.size()) +
                          " entries, expected " +
                          std::to_string(base_.size() * base_.size()));
  }
}

std::vector<cplx> KernelSpec::row_integrals() const {
  const auto n = size();
  std::vector<cplx> r(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedComplexSum s;
    for (std::size_t y = 0; y < n; ++y) s.add(k(x, y) * base_.weight(y));
    r[x] = s.value();
  }
  return r;
}

std::vector<double> KernelSpec::row_square_integrals() const {
  const auto n = size();
  std::vector<double> r(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedSum s;
    for (std::size_t y = 0; y < n; ++y) s.add(std::norm(k(x, y)) * base_.weight(y));
    r[x] = s.value();
  }
  return r;
}

CFun kernel_apply(const KernelSpec& ks, const CFun& f) {
  const auto n = ks.size();
  if (f.size() != n) {
    throw StructuralError("kernel_apply: function has " +
                          std::to_string(f.size()) + " values, space has " +
                          std::to_string(n));
  }
  std::vector<cplx> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedComplexSum s;
    for (std::size_t y = 0; y < n; ++y) s.add(ks.k(x, y) * f[y] * ks.base().weight(y));
    out[x] = s.value();
  }
  return CFun(std::move(out));
}

KernelSpec normalize_to_probability(const KernelSpec& ks) {
  const double total = ks.base().total();
  std::vector<double> mu(ks.base().weights().begin(), ks.base().weights().end());
  for (auto& m : mu) m /= total;
  std::vector<cplx> k = ks.kernel();
  for (auto& z : k) z *= total;
  return KernelSpec(MeasureSpace(ks.base().ids(), std::move(mu)), std::move(k));
}

namespace {

void require_probability(const KernelSpec& ks) {
  if (std::abs(ks.base().total() - 1.0) > 1e-12) {
    throw ArgumentError(
        "kernel lift needs a probability measure (mu(X) = " +
        std::to_string(ks.base().total()) +
        "); rescale with normalize_to_probability, which maps (k, mu) to "
        "(k mu(X), mu / mu(X)) and leaves the operator unchanged");
  }
}

}  // namespace

CondOpSpec lift_to_condop(const KernelSpec& ks) {
  require_probability(ks);
  const auto n = ks.size();
  if (n > kMaxExplicitLift) {
    throw ArgumentError("kernel of size " + std::to_string(n) +
                        " is too large for an explicit lift (max " +
                        std::to_string(kMaxExplicitLift) + "); use LazyLift");
  }
  const auto& mu = ks.base();
  std::vector<std::string> ids;
  std::vector<double> weights;
  std::vector<cplx> u;
  std::vector<std::size_t> labels;
  ids.reserve(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      ids.push_back(mu.id(x) + "|" + mu.id(y));
      weights.push_back(mu.weight(x) * mu.weight(y));
      u.push_back(ks.k(x, y));
      labels.push_back(x);
    }
  }
  return CondOpSpec(MeasureSpace(std::move(ids), std::move(weights)),
                    Partition::from_labels(labels), CFun(std::move(u)),
                    CFun::constant(n * n, 1.0));
}

LazyLift::LazyLift(KernelSpec ks) : ks_(std::move(ks)) { require_probability(ks_); }

double LazyLift::weight(std::size_t point) const {
  const auto n = ks_.size();
  return ks_.base().weight(point / n) * ks_.base().weight(point % n);
}

CFun LazyLift::apply(const CFun& g) const {
  const auto n = ks_.size();
  if (g.size() != n * n) throw StructuralError("LazyLift::apply: wrong length");
  std::vector<cplx> out(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedComplexSum s;
    for (std::size_t t = 0; t < n; ++t) {
      s.add(ks_.k(x, t) * g[x * n + t] * ks_.base().weight(t));
    }
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(x * n), n, s.value());
  }
  return CFun(std::move(out));
}

CFun LazyLift::adjoint_apply(const CFun& g) const {
  const auto n = ks_.size();
  if (g.size() != n * n) throw StructuralError("LazyLift::adjoint_apply: wrong length");
  std::vector<cplx> out(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    CompensatedComplexSum s;
    for (std::size_t t = 0; t < n; ++t) s.add(g[x * n + t] * ks_.base().weight(t));
    const cplx avg = s.value();
    for (std::size_t y = 0; y < n; ++y) out[x * n + y] = std::conj(ks_.k(x, y)) * avg;
  }
  return CFun(std::move(out));
}

CFun LazyLift::embed(const CFun& f) const {
  const auto n = ks_.size();
  if (f.size() != n) throw StructuralError("LazyLift::embed: wrong length");
  std::vector<cplx> out(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) out[x * n + y] = f[y];
  }
  return CFun(std::move(out));
}

CFun LazyLift::restrict_to(const CFun& g, std::size_t y) const {
  const auto n = ks_.size();
  if (g.size() != n * n || y >= n) {
    throw StructuralError("LazyLift::restrict_to: wrong length or column");
  }
  std::vector<cplx> out(n);
  for (std::size_t x = 0; x < n; ++x) out[x] = g[x * n + y];
  return CFun(std::move(out));
}

KernelBoundReport kernel_bounded_report(const KernelSpec& ks) {
  KernelBoundReport r;
  r.row_square_integrals = ks.row_square_integrals();
  for (const double s : r.row_square_integrals) {
    r.all_rows_finite = r.all_rows_finite && std::isfinite(s);
    r.row_sup = std::max(r.row_sup, s);
  }
  r.lifted_norm = std::sqrt(r.row_sup);
  return r;
}

namespace {

struct RowIdentity {
  std::vector<std::size_t> failures;
  std::vector<double> defect;
  double max_defect = 0.0;
  std::vector<cplx> r;
  std::vector<double> s;
};

/// |r(x)|^2 against s(x), relative to s(x); rows with s below
/// (supp_tol * sqrt(max s))^2 hold trivially.
RowIdentity row_identity(const KernelSpec& ks, double tau, double supp_tol) {
  if (!(tau >= 0.0)) throw ArgumentError("criterion tolerance must be >= 0");
  RowIdentity out;
  out.r = ks.row_integrals();
  out.s = ks.row_square_integrals();
  const double smax = *std::max_element(out.s.begin(), out.s.end());
  const double floor = supp_tol * supp_tol * smax;
  out.defect.assign(ks.size(), 0.0);
  for (std::size_t x = 0; x < ks.size(); ++x) {
    const double lhs = std::norm(out.r[x]);
    const double big = std::max(lhs, out.s[x]);
    if (big <= floor) continue;
    const double rel = std::abs(lhs - out.s[x]) / big;
    out.defect[x] = rel;
    out.max_defect = std::max(out.max_defect, rel);
    if (rel > tau) out.failures.push_back(x);
  }
  return out;
}

}  // namespace

CriterionVerdict kernel_centered(const KernelSpec& ks, double tau,
                                 double supp_tol) {
  const auto id = row_identity(ks, tau, supp_tol);
  CriterionVerdict v;
  if (id.failures.empty()) {
    v.status = Status::yes;
    v.criterion_id = "row_integral_equality";
    v.residual = id.max_defect;
    return v;
  }
  // The necessary clause applies on S(r), r(x) = int k(x, y) dmu(y).
  const double smax = *std::max_element(id.s.begin(), id.s.end());
  const double r_tol = supp_tol * std::sqrt(smax);
  std::vector<std::size_t> on, off;
  for (const auto x : id.failures) {
    (std::abs(id.r[x]) > r_tol ? on : off).push_back(x);
  }
  auto worst = [&](const std::vector<std::size_t>& idx) {
    double m = 0.0;
    for (const auto x : idx) m = std::max(m, id.defect[x]);
    return m;
  };
  if (!on.empty()) {
    v.status = Status::no;
    v.criterion_id = "necessary_on_row_integral_support";
    v.residual = worst(on);
    v.witness = std::move(on);
  } else {
    v.status = Status::indeterminate;
    v.criterion_id = "gap_off_row_integral_support";
    v.residual = worst(off);
    v.witness = std::move(off);
  }
  return v;
}

CriterionVerdict kernel_normal(const KernelSpec& ks, double tau,
                               double supp_tol) {
  const auto id = row_identity(ks, tau, supp_tol);
  CriterionVerdict v;
  v.criterion_id = "row_integral_equality";
  if (id.failures.empty()) {
    v.status = Status::yes;
    v.residual = id.max_defect;
  } else {
    v.status = Status::no;
    v.witness = id.failures;
    for (const auto x : id.failures) v.residual = std::max(v.residual, id.defect[x]);
  }
  return v;
}

oracle::DenseOperator kernel_matrix(const KernelSpec& ks) {
  const auto n = static_cast<Eigen::Index>(ks.size());
  oracle::Matrix a(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      a(x, y) = ks.k(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) *
                ks.base().weight(static_cast<std::size_t>(y));
    }
  }
  return oracle::DenseOperator(
      std::move(a), {ks.base().weights().begin(), ks.base().weights().end()});
}

oracle::DenseOperator lifted_matrix(const KernelSpec& ks) {
  return oracle::materialize(lift_to_condop(ks));
}

double lifted_normality_residual(const KernelSpec& ks) {
  const LazyLift lift(ks);
  const std::size_t n = ks.size();
  const auto N = static_cast<Eigen::Index>(n);
  // E acts row by row on X x X, so the lift is block diagonal with one
  // n x n block per row. Each block is assembled in B-space from basis
  // vectors pushed through the lazy operator.
  double norm2 = 0.0, comm = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    oracle::Matrix t(N, N), ts(N, N);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t pj = x * n + j;
      CFun e(std::vector<cplx>(lift.size()));
      e[pj] = 1.0 / std::sqrt(lift.weight(pj));
      const auto te = lift.apply(e);
      const auto tse = lift.adjoint_apply(e);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::sqrt(lift.weight(x * n + i));
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * te[x * n + i];
        ts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * tse[x * n + i];
      }
    }
    const oracle::Matrix sts = ts * t;
    const oracle::Matrix c = sts - t * ts;
    Eigen::SelfAdjointEigenSolver<oracle::Matrix> es_n(0.5 * (sts + sts.adjoint()),
                                                        Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<oracle::Matrix> es_c(0.5 * (c + c.adjoint()),
                                                        Eigen::EigenvaluesOnly);
    norm2 = std::max(norm2, es_n.eigenvalues().maxCoeff());
    comm = std::max(comm, es_c.eigenvalues().cwiseAbs().maxCoeff());
  }
  return norm2 > 0.0 ? comm / norm2 : 0.0;
}

}  // namespace condop
