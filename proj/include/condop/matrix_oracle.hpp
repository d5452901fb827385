#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "condop/condop_core.hpp"
#include "condop/measure_space.hpp"

namespace condop::oracle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// A dense operator on L^2(mu). Entries are in the point basis; adjoints and
/// norms refer to the weighted inner product <f, g>_mu.
///
/// Most routines work on the symmetrized matrix B = D^(1/2) A D^(-1/2),
/// D = diag(mu), which turns weighted-adjoint questions into ordinary ones.
class DenseOperator {
 public:
  DenseOperator(Matrix entries, std::vector<double> mu);

  const Matrix& entries() const noexcept { return entries_; }
  const std::vector<double>& mu() const noexcept { return mu_; }
  Eigen::Index dim() const noexcept { return entries_.rows(); }

  /// B = D^(1/2) A D^(-1/2).
  Matrix symmetrized() const;
  /// Inverse of symmetrized(): entries from a B-space matrix.
  static DenseOperator from_symmetrized(const Matrix& b, std::vector<double> mu);

  CFun apply(const CFun& f) const;

  DenseOperator operator*(const DenseOperator& o) const;
  DenseOperator operator-(const DenseOperator& o) const;
  DenseOperator operator+(const DenseOperator& o) const;

  static DenseOperator identity(std::vector<double> mu);
  static DenseOperator zero(std::vector<double> mu);

 private:
  Matrix entries_;
  std::vector<double> mu_;
};

/// Matrix of f -> outer E(inner f): entry (i, j) = outer(i) inner(j) mu(j) /
/// mu(atom(i)) when i and j share an atom, else 0.
DenseOperator materialize(const MultiplierForm& form, const Partition& p,
                          const MeasureSpace& m);
DenseOperator materialize(const CondOpSpec& spec);

/// A* with (A*)(i, j) = conj(A(j, i)) mu(j) / mu(i).
DenseOperator weighted_adjoint(const DenseOperator& a);

struct NormOptions {
  double tol = 1e-12;
  int max_iter = 20000;
};

/// Largest singular value in the weighted norm, by power iteration on B*B.
/// Slow gaps are handled by repeatedly squaring the iteration matrix.
/// Throws NumericalError when max_iter power steps do not converge.
double op_norm(const DenseOperator& a, const NormOptions& opts = {});

/// Spectral norm of a B-space matrix through op_norm's iteration.
double spectral_norm(const Matrix& b, const NormOptions& opts = {});

/// A^p for A Hermitian and positive semi-definite in <.,.>_mu.
///
/// Eigenvalues below 1e-10 * scale in magnitude on the negative side are
/// clamped to zero; positive dust below 64 eps * lambda_max is clamped too.
/// Throws ContractViolation for non-Hermitian or indefinite input.
DenseOperator herm_power(const DenseOperator& a, double p);

struct PolarFactors {
  DenseOperator isometry;  // U
  DenseOperator modulus;   // P = (A*A)^(1/2)
};

/// A = U P with U a partial isometry vanishing on ker P. Singular values
/// below rank_tol * sigma_max are treated as zero.
PolarFactors polar_factors(const DenseOperator& a, double rank_tol = 1e-10);

struct FamilyCheck {
  bool passed = false;
  double max_residual = 0.0;
  /// Exponents of the worst pair; kind 0 = A*^n A^n, kind 1 = A^k A*^k.
  int worst_kind_a = 0, worst_pow_a = 0, worst_kind_b = 0, worst_pow_b = 0;
};

/// Commutativity of {A*^n A^n, A^k A*^k : 1 <= n, k <= depth}.
///
/// Each pairwise commutator is measured in the Frobenius norm of B-space and
/// divided by ||A||^(2(n+k)), the product of the two members' norm bounds.
/// The zero operator passes trivially.
FamilyCheck commuting_family_check(const DenseOperator& a, int depth, double tol);

/// ||A*A - AA*|| / ||A||^2 (spectral norm); 0 for A = 0.
double normality_residual(const DenseOperator& a);

struct EigenCluster {
  cplx value;
  /// Algebraic multiplicity: number of computed eigenvalues in the cluster.
  int multiplicity = 0;
  /// Orthonormal (in mu) basis of eigenvectors, point basis, one per column.
  Matrix basis;
  /// Largest ||A v - value v||_mu over basis vectors, divided by ||A||.
  double residual = 0.0;
};

struct EigenOptions {
  double tol = 1e-8;
  /// Eigenvalues within cluster_tol * ||A|| are merged.
  double cluster_tol = 1e-8;
  Eigen::Index cap = 256;
};

/// All eigenvalues of A grouped into clusters, sorted by ascending real then
/// imaginary part. Multiplicities sum to n.
/// Throws NumericalError on QR non-convergence or a residual above tol.
std::vector<EigenCluster> eigensolve(const DenseOperator& a,
                                     const EigenOptions& opts = {});

/// Smallest singular value of (A* - conj(lambda)) restricted to the span of
/// `basis`, relative to ||A||: zero iff the eigenspace holds a common
/// eigenvector of A and A*.
double joint_residual(const DenseOperator& a, const EigenCluster& cluster);

/// max |X - Y| / max |Y| over B-space entries (absolute when Y = 0).
double relative_entry_error(const DenseOperator& x, const DenseOperator& y);

/// ||X - Y|| spectral, B-space.
double distance(const DenseOperator& x, const DenseOperator& y);

}  // namespace condop::oracle
