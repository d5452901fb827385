#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace condop {

using cplx = std::complex<double>;

/// Default relative support tolerance. Callers scale it by the natural
/// magnitude of the quantity whose support is taken.
inline constexpr double kDefaultSuppTol = 1e-10;

/// A finite measure space: n labelled points with strictly positive masses.
/// The measure is stored unnormalized.
class MeasureSpace {
 public:
  MeasureSpace(std::vector<std::string> ids, std::vector<double> weights);

  /// Points labelled "p0", "p1", ...
  static MeasureSpace from_weights(std::vector<double> weights);
  static MeasureSpace uniform(std::size_t n, double total = 1.0);

  std::size_t size() const noexcept { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  double total() const noexcept { return total_; }

  /// Index of the point with the given label; throws StructuralError.
  std::size_t index_of(const std::string& id) const;

  bool operator==(const MeasureSpace&) const = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

/// The atoms of a sub-sigma-algebra, as a partition of the point indices.
///
/// Blocks are stored canonically: indices ascending inside each block and
/// blocks ordered by their smallest index. Block numbering therefore depends
/// only on the set partition, not on the order it was written in.
class Partition {
 public:
  Partition(std::vector<std::vector<std::size_t>> blocks, std::size_t n);

  /// Build from a label per point; labels need not be contiguous.
  static Partition from_labels(std::span<const std::size_t> labels);
  static Partition singletons(std::size_t n);
  static Partition single_block(std::size_t n);

  std::size_t point_count() const noexcept { return atom_of_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  std::span<const std::size_t> block(std::size_t b) const { return blocks_[b]; }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept {
    return blocks_;
  }
  std::size_t atom_of(std::size_t i) const { return atom_of_[i]; }

  /// mu(A) for every block, in block order.
  std::vector<double> block_masses(const MeasureSpace& m) const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> atom_of_;
};

/// A complex-valued function on the points of a MeasureSpace.
class CFun {
 public:
  CFun() = default;
  explicit CFun(std::vector<cplx> values) : values_(std::move(values)) {}
  CFun(std::initializer_list<cplx> values) : values_(values) {}

  static CFun constant(std::size_t n, cplx c) {
    return CFun(std::vector<cplx>(n, c));
  }
  static CFun zeros(std::size_t n) { return constant(n, 0.0); }
  /// Indicator of point i.
  static CFun basis(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return values_.size(); }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<cplx>& values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  CFun conj() const;
  /// |f|^2 pointwise.
  CFun abs2() const;
  double max_abs() const;

  bool operator==(const CFun&) const = default;

 private:
  std::vector<cplx> values_;
};

/// Pointwise product.
CFun operator*(const CFun& a, const CFun& b);
CFun operator*(cplx s, const CFun& f);
CFun operator+(const CFun& a, const CFun& b);
CFun operator-(const CFun& a, const CFun& b);

/// Points where |f| exceeds a threshold.
class SupportSet {
 public:
  SupportSet(std::vector<bool> member_flags, double tolerance)
      : flags_(std::move(member_flags)), tolerance_(tolerance) {}

  std::size_t size() const noexcept { return flags_.size(); }
  bool contains(std::size_t i) const { return flags_[i]; }
  const std::vector<bool>& flags() const noexcept { return flags_; }
  double tolerance() const noexcept { return tolerance_; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  bool full() const { return count() == size(); }
  std::vector<std::size_t> members() const;

  SupportSet operator&(const SupportSet& other) const;
  /// Same member flags (tolerances are ignored).
  bool same_members(const SupportSet& other) const {
    return flags_ == other.flags_;
  }

 private:
  std::vector<bool> flags_;
  double tolerance_;
};

/// Conditional expectation onto the partition's algebra: the mu-weighted
/// average over each block, broadcast back to the block's points.
CFun cond_expect(const CFun& f, const Partition& p, const MeasureSpace& m);

/// One value per block, E(f) on that block.
std::vector<cplx> block_averages(const CFun& f, const Partition& p,
                                 const MeasureSpace& m);

/// Flag i is set iff |f(i)| > tau. tau is absolute.
SupportSet support_of(const CFun& f, double tau);

/// True iff on every block max |f(x) - E(f)(x)| <= tau.
bool is_algebra_measurable(const CFun& f, const Partition& p,
                           const MeasureSpace& m, double tau);

/// <f, g>_mu = sum f(x) conj(g(x)) mu(x).
cplx inner(const CFun& f, const CFun& g, const MeasureSpace& m);
double norm(const CFun& f, const MeasureSpace& m);

/// Integral of f against mu, compensated.
cplx integrate(const CFun& f, const MeasureSpace& m);

}  // namespace condop
