#include "condop/matrix_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "condop/errors.hpp"

namespace condop::oracle {

namespace {

Eigen::VectorXd sqrt_mu(const std::vector<double>& mu) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(mu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) s[static_cast<Eigen::Index>(i)] = std::sqrt(mu[i]);
  return s;
}

void require_same_space(const DenseOperator& a, const DenseOperator& b) {
  if (a.dim() != b.dim() || a.mu() != b.mu()) {
    throw StructuralError("dense operators live on different spaces");
  }
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

DenseOperator::DenseOperator(Matrix entries, std::vector<double> mu)
    : entries_(std::move(entries)), mu_(std::move(mu)) {
  if (entries_.rows() != entries_.cols()) {
    throw StructuralError("dense operator must be square");
  }
  if (entries_.rows() != static_cast<Eigen::Index>(mu_.size())) {
    throw StructuralError("dense operator dimension " +
                          std::to_string(entries_.rows()) +
                          " does not match space of " +
                          std::to_string(mu_.size()) + " points");
  }
}

Matrix DenseOperator::symmetrized() const {
  const auto s = sqrt_mu(mu_);
  return s.asDiagonal() * entries_ * s.cwiseInverse().asDiagonal();
}

DenseOperator DenseOperator::from_symmetrized(const Matrix& b,
                                              std::vector<double> mu) {
  const auto s = sqrt_mu(mu);
  Matrix a = s.cwiseInverse().asDiagonal() * b * s.asDiagonal();
  return DenseOperator(std::move(a), std::move(mu));
}

CFun DenseOperator::apply(const CFun& f) const {
  if (static_cast<Eigen::Index>(f.size()) != dim()) {
    throw StructuralError("dense apply: function length does not match");
  }
  const Vector x = Eigen::Map<const Vector>(f.values().data(), dim());
  const Vector y = entries_ * x;
  return CFun(std::vector<cplx>(y.data(), y.data() + y.size()));
}

DenseOperator DenseOperator::operator*(const DenseOperator& o) const {
  require_same_space(*this, o);
  return DenseOperator(entries_ * o.entries_, mu_);
}

DenseOperator DenseOperator::operator-(const DenseOperator& o) const {
  require_same_space(*this, o);
  return DenseOperator(entries_ - o.entries_, mu_);
}

DenseOperator DenseOperator::operator+(const DenseOperator& o) const {
  require_same_space(*this, o);
  return DenseOperator(entries_ + o.entries_, mu_);
}

DenseOperator DenseOperator::identity(std::vector<double> mu) {
  const auto n = static_cast<Eigen::Index>(mu.size());
  return DenseOperator(Matrix::Identity(n, n), std::move(mu));
}

DenseOperator DenseOperator::zero(std::vector<double> mu) {
  const auto n = static_cast<Eigen::Index>(mu.size());
  return DenseOperator(Matrix::Zero(n, n), std::move(mu));
}

DenseOperator materialize(const MultiplierForm& form, const Partition& p,
                          const MeasureSpace& m) {
  const auto n = m.size();
  if (p.point_count() != n || form.outer.size() != n || form.inner.size() != n) {
    throw StructuralError("materialize: dimension mismatch");
  }
  const auto masses = p.block_masses(m);
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t b = 0; b < p.block_count(); ++b) {
    for (const auto i : p.block(b)) {
      for (const auto j : p.block(b)) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            form.outer[i] * form.inner[j] * m.weight(j) / masses[b];
      }
    }
  }
  return DenseOperator(std::move(a), {m.weights().begin(), m.weights().end()});
}

DenseOperator materialize(const CondOpSpec& spec) {
  return materialize(spec.form(), spec.partition(), spec.space());
}

DenseOperator weighted_adjoint(const DenseOperator& a) {
  const auto n = a.dim();
  Matrix out(n, n);
  const auto& mu = a.mu();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = std::conj(a.entries()(j, i)) *
                  (mu[static_cast<std::size_t>(j)] / mu[static_cast<std::size_t>(i)]);
    }
  }
  return DenseOperator(std::move(out), a.mu());
}

double spectral_norm(const Matrix& b, const NormOptions& opts) {
  if (!(opts.tol > 0.0)) throw ArgumentError("op_norm: tol must be > 0");
  const Matrix h = b.adjoint() * b;
  const auto n = h.rows();
  if (n == 0 || max_abs(h) == 0.0) return 0.0;

  // Fixed start vector: results must not depend on global RNG state.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = cplx(1.0 + unif(rng), unif(rng));
  x.normalize();

  Matrix k = h / h.norm();
  constexpr int kStepsPerRound = 32;
  constexpr int kMaxSquarings = 60;
  int steps = 0;
  int squarings = 0;
  while (steps < opts.max_iter) {
    for (int s = 0; s < kStepsPerRound && steps < opts.max_iter; ++s, ++steps) {
      Vector y = k * x;
      const double ny = y.norm();
      if (ny == 0.0 || !std::isfinite(ny)) break;
      x = y / ny;
    }
    const Vector hx = h * x;
    const double rho = x.dot(hx).real();
    const double resid = (hx - rho * x).norm();
    if (rho > 0.0 && resid <= opts.tol * rho) return std::sqrt(rho);
    if (squarings < kMaxSquarings) {
      k = k * k;
      const double kn = k.norm();
      if (kn == 0.0 || !std::isfinite(kn)) break;
      k /= kn;
      ++squarings;
    }
  }
  throw NumericalError("op_norm: power iteration did not converge", steps);
}

double op_norm(const DenseOperator& a, const NormOptions& opts) {
  return spectral_norm(a.symmetrized(), opts);
}

DenseOperator herm_power(const DenseOperator& a, double p) {
  if (!(p > 0.0)) throw ArgumentError("herm_power: p must be > 0");
  const Matrix b = a.symmetrized();
  const double scale = max_abs(b);
  if (scale == 0.0) return DenseOperator::zero(a.mu());
  if (max_abs(b - b.adjoint()) > 1e-10 * scale) {
    throw ContractViolation(
        "herm_power: operator is not Hermitian in the weighted inner product");
  }
  const Matrix hb = 0.5 * (b + b.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hb);
  if (es.info() != Eigen::Success) {
    throw NumericalError("herm_power: Hermitian eigensolver failed",
                         static_cast<int>(30 * hb.rows()));
  }
  Eigen::VectorXd lam = es.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  if (lam.minCoeff() < -1e-10 * lmax) {
    throw ContractViolation("herm_power: operator is not positive semi-definite");
  }
  const double dust = 64.0 * std::numeric_limits<double>::epsilon() * lmax;
  Eigen::VectorXd powered(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    powered[i] = lam[i] <= dust ? 0.0 : std::pow(lam[i], p);
  }
  const Matrix& v = es.eigenvectors();
  const Matrix out = v * powered.asDiagonal() * v.adjoint();
  return DenseOperator::from_symmetrized(out, a.mu());
}

PolarFactors polar_factors(const DenseOperator& a, double rank_tol) {
  const Matrix b = a.symmetrized();
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > rank_tol * smax && smax > 0.0) ++rank;

  const Matrix& left = svd.matrixU();
  const Matrix& right = svd.matrixV();
  const Matrix u = left.leftCols(rank) * right.leftCols(rank).adjoint();
  const Matrix pm = right * s.cast<cplx>().asDiagonal() * right.adjoint();
  return {DenseOperator::from_symmetrized(u, a.mu()),
          DenseOperator::from_symmetrized(pm, a.mu())};
}

FamilyCheck commuting_family_check(const DenseOperator& a, int depth,
                                   double tol) {
  if (depth < 1) throw ArgumentError("commuting_family_check: depth must be >= 1");
  FamilyCheck out;
  const Matrix b = a.symmetrized();
  const double na = spectral_norm(b);
  if (na == 0.0) {
    out.passed = true;
    return out;
  }

  struct Member {
    int kind;
    int power;
    Matrix m;
  };
  std::vector<Member> family;
  Matrix bn = b;
  for (int n = 1; n <= depth; ++n) {
    if (n > 1) bn = bn * b;
    family.push_back({0, n, bn.adjoint() * bn});
    family.push_back({1, n, bn * bn.adjoint()});
  }

  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      const auto& x = family[i];
      const auto& y = family[j];
      const double bound = std::pow(na, 2 * (x.power + y.power));
      const double r = (x.m * y.m - y.m * x.m).norm() / bound;
      if (r > out.max_residual) {
        out.max_residual = r;
        out.worst_kind_a = x.kind;
        out.worst_pow_a = x.power;
        out.worst_kind_b = y.kind;
        out.worst_pow_b = y.power;
      }
    }
  }
  out.passed = out.max_residual <= tol;
  return out;
}

double normality_residual(const DenseOperator& a) {
  const Matrix b = a.symmetrized();
  const double na = spectral_norm(b);
  if (na == 0.0) return 0.0;
  const Matrix c = b.adjoint() * b - b * b.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff() / (na * na);
}

std::vector<EigenCluster> eigensolve(const DenseOperator& a,
                                     const EigenOptions& opts) {
  const auto n = a.dim();
  if (n > opts.cap) {
    throw ArgumentError("eigensolve: dimension " + std::to_string(n) +
                        " exceeds cap " + std::to_string(opts.cap));
  }
  const Matrix b = a.symmetrized();
  const auto s = sqrt_mu(a.mu());
  const double na = spectral_norm(b);
  if (na == 0.0) {
    EigenCluster c;
    c.value = 0.0;
    c.multiplicity = static_cast<int>(n);
    c.basis = s.cwiseInverse().asDiagonal() * Matrix::Identity(n, n);
    return {c};
  }

  Eigen::ComplexEigenSolver<Matrix> ces(b, true);
  if (ces.info() != Eigen::Success) {
    throw NumericalError("eigensolve: complex Schur QR did not converge",
                         static_cast<int>(30 * n));
  }
  const auto& lam = ces.eigenvalues();
  const auto& vecs = ces.eigenvectors();

  // Single-linkage clustering within cluster_tol * ||A||.
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  const double merge = opts.cluster_tol * na;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(lam[i] - lam[j]) <= merge) parent[static_cast<std::size_t>(find(i))] = find(j);
    }
  }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> group_of(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = find(i);
    auto& g = group_of[static_cast<std::size_t>(r)];
    if (g < 0) {
      g = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(g)].push_back(i);
  }

  std::vector<EigenCluster> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    EigenCluster c;
    cplx sum = 0.0;
    for (const auto i : g) sum += lam[i];
    c.value = sum / static_cast<double>(g.size());
    c.multiplicity = static_cast<int>(g.size());

    Matrix basis_b;
    if (g.size() == 1) {
      basis_b = vecs.col(g.front()).normalized();
    } else {
      // Null space of (B - value I): right singular vectors for the smallest
      // singular values, at most `multiplicity` of them and at least one.
      const Matrix shifted = b - c.value * Matrix::Identity(n, n);
      Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      Eigen::Index k = 0;
      while (k < c.multiplicity && sv[n - 1 - k] <= opts.tol * na) ++k;
      k = std::max<Eigen::Index>(k, 1);
      basis_b = svd.matrixV().rightCols(k);
    }
    double worst = 0.0;
    for (Eigen::Index col = 0; col < basis_b.cols(); ++col) {
      const Vector v = basis_b.col(col);
      worst = std::max(worst, (b * v - c.value * v).norm() / na);
    }
    c.residual = worst;
    if (worst > opts.tol) {
      throw NumericalError("eigensolve: eigenpair residual " +
                               std::to_string(worst) + " exceeds tolerance",
                           static_cast<int>(30 * n));
    }
    c.basis = s.cwiseInverse().asDiagonal() * basis_b;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
    return x.value.imag() < y.value.imag();
  });
  return out;
}

double joint_residual(const DenseOperator& a, const EigenCluster& cluster) {
  const Matrix b = a.symmetrized();
  const double na = spectral_norm(b);
  if (na == 0.0) return 0.0;
  const auto s = sqrt_mu(a.mu());
  const Matrix vb = s.asDiagonal() * cluster.basis;
  const Matrix m = (b.adjoint() - std::conj(cluster.value) *
                                      Matrix::Identity(b.rows(), b.cols())) * vb;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return sv[sv.size() - 1] / na;
}

double relative_entry_error(const DenseOperator& x, const DenseOperator& y) {
  require_same_space(x, y);
  const Matrix bx = x.symmetrized();
  const Matrix by = y.symmetrized();
  const double diff = max_abs(bx - by);
  const double ref = max_abs(by);
  return ref > 0.0 ? diff / ref : diff;
}

double distance(const DenseOperator& x, const DenseOperator& y) {
  require_same_space(x, y);
  return spectral_norm(x.symmetrized() - y.symmetrized());
}

}  // namespace condop::oracle
