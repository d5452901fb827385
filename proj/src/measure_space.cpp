#include "condop/measure_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "condop/errors.hpp"
#include "condop/summation.hpp"

namespace condop {

MeasureSpace::MeasureSpace(std::vector<std::string> ids,
                           std::vector<double> weights)
    : ids_(std::move(ids)), weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw StructuralError("measure space must have at least one point");
  }
  if (ids_.size() != weights_.size()) {
    throw StructuralError("measure space: " + std::to_string(ids_.size()) +
                          " ids but " + std::to_string(weights_.size()) +
                          " weights");
  }
  std::set<std::string> seen;
  CompensatedSum total;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw StructuralError("measure space: weight of point '" + ids_[i] +
                            "' must be finite and > 0");
    }
    if (!seen.insert(ids_[i]).second) {
      throw StructuralError("measure space: duplicate point id '" + ids_[i] +
                            "'");
    }
    total.add(weights_[i]);
  }
  total_ = total.value();
}

MeasureSpace MeasureSpace::from_weights(std::vector<double> weights) {
  std::vector<std::string> ids;
  ids.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    ids.push_back("p" + std::to_string(i));
  }
  return MeasureSpace(std::move(ids), std::move(weights));
}

MeasureSpace MeasureSpace::uniform(std::size_t n, double total) {
  return from_weights(std::vector<double>(n, total / static_cast<double>(n)));
}

std::size_t MeasureSpace::index_of(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) {
    throw StructuralError("unknown point id '" + id + "'");
  }
  return static_cast<std::size_t>(it - ids_.begin());
}

Partition::Partition(std::vector<std::vector<std::size_t>> blocks,
                     std::size_t n)
    : blocks_(std::move(blocks)) {
  constexpr auto unset = static_cast<std::size_t>(-1);
  atom_of_.assign(n, unset);
  for (auto& b : blocks_) {
    if (b.empty()) throw StructuralError("partition: empty block");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    for (const auto i : blocks_[k]) {
      if (i >= n) {
        throw StructuralError("partition: point index " + std::to_string(i) +
                              " out of range (n = " + std::to_string(n) + ")");
      }
      if (atom_of_[i] != unset) {
        throw StructuralError("partition: point " + std::to_string(i) +
                              " appears in more than one block");
      }
      atom_of_[i] = k;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (atom_of_[i] == unset) {
      throw StructuralError("partition: point " + std::to_string(i) +
                            " is not covered by any block");
    }
  }
}

Partition Partition::from_labels(std::span<const std::size_t> labels) {
  std::map<std::size_t, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_label[labels[i]].push_back(i);
  }
  std::vector<std::vector<std::size_t>> blocks;
  blocks.reserve(by_label.size());
  for (auto& [label, members] : by_label) blocks.push_back(std::move(members));
  return Partition(std::move(blocks), labels.size());
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::vector<std::size_t>> blocks(n);
  for (std::size_t i = 0; i < n; ++i) blocks[i] = {i};
  return Partition(std::move(blocks), n);
}

Partition Partition::single_block(std::size_t n) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return Partition({std::move(all)}, n);
}

std::vector<double> Partition::block_masses(const MeasureSpace& m) const {
  if (m.size() != point_count()) {
    throw StructuralError("partition covers " + std::to_string(point_count()) +
                          " points, measure space has " +
                          std::to_string(m.size()));
  }
  std::vector<double> masses;
  masses.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    CompensatedSum s;
    for (const auto i : b) s.add(m.weight(i));
    masses.push_back(s.value());
  }
  return masses;
}

CFun CFun::basis(std::size_t n, std::size_t i) {
  CFun e = zeros(n);
  e[i] = 1.0;
  return e;
}

CFun CFun::conj() const {
  std::vector<cplx> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](cplx z) { return std::conj(z); });
  return CFun(std::move(out));
}

CFun CFun::abs2() const {
  std::vector<cplx> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](cplx z) { return cplx(std::norm(z), 0.0); });
  return CFun(std::move(out));
}

double CFun::max_abs() const {
  double m = 0.0;
  for (const auto z : values_) m = std::max(m, std::abs(z));
  return m;
}

namespace {

void require_same_size(const CFun& a, const CFun& b) {
  if (a.size() != b.size()) {
    throw StructuralError("function lengths differ: " +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

void require_fits(const CFun& f, const Partition& p, const MeasureSpace& m) {
  if (f.size() != m.size() || p.point_count() != m.size()) {
    throw StructuralError(
        "dimension mismatch: function has " + std::to_string(f.size()) +
        " values, partition covers " + std::to_string(p.point_count()) +
        " points, space has " + std::to_string(m.size()));
  }
}

}  // namespace

CFun operator*(const CFun& a, const CFun& b) {
  require_same_size(a, b);
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return CFun(std::move(out));
}

CFun operator*(cplx s, const CFun& f) {
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = s * f[i];
  return CFun(std::move(out));
}

CFun operator+(const CFun& a, const CFun& b) {
  require_same_size(a, b);
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return CFun(std::move(out));
}

CFun operator-(const CFun& a, const CFun& b) {
  require_same_size(a, b);
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return CFun(std::move(out));
}

std::size_t SupportSet::count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), true));
}

std::vector<std::size_t> SupportSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.push_back(i);
  }
  return out;
}

SupportSet SupportSet::operator&(const SupportSet& other) const {
  if (other.size() != size()) {
    throw StructuralError("support sets over different point counts");
  }
  std::vector<bool> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = flags_[i] && other.flags_[i];
  return SupportSet(std::move(out), std::max(tolerance_, other.tolerance_));
}

std::vector<cplx> block_averages(const CFun& f, const Partition& p,
                                 const MeasureSpace& m) {
  require_fits(f, p, m);
  std::vector<cplx> avg;
  avg.reserve(p.block_count());
  for (const auto& b : p.blocks()) {
    CompensatedComplexSum s;
    CompensatedSum mass;
    for (const auto i : b) {
      s.add(f[i] * m.weight(i));
      mass.add(m.weight(i));
    }
    avg.push_back(s.value() / mass.value());
  }
  return avg;
}

CFun cond_expect(const CFun& f, const Partition& p, const MeasureSpace& m) {
  const auto avg = block_averages(f, p, m);
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = avg[p.atom_of(i)];
  return CFun(std::move(out));
}

SupportSet support_of(const CFun& f, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("support tolerance must be >= 0");
  std::vector<bool> flags(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) flags[i] = std::abs(f[i]) > tau;
  return SupportSet(std::move(flags), tau);
}

bool is_algebra_measurable(const CFun& f, const Partition& p,
                           const MeasureSpace& m, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("measurability tolerance must be >= 0");
  const auto avg = block_averages(f, p, m);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f[i] - avg[p.atom_of(i)]) > tau) return false;
  }
  return true;
}

cplx inner(const CFun& f, const CFun& g, const MeasureSpace& m) {
  require_same_size(f, g);
  if (f.size() != m.size()) {
    throw StructuralError("inner product: function length does not match space");
  }
  CompensatedComplexSum s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s.add(f[i] * std::conj(g[i]) * m.weight(i));
  }
  return s.value();
}

double norm(const CFun& f, const MeasureSpace& m) {
  return std::sqrt(std::max(0.0, inner(f, f, m).real()));
}

cplx integrate(const CFun& f, const MeasureSpace& m) {
  if (f.size() != m.size()) {
    throw StructuralError("integrate: function length does not match space");
  }
  CompensatedComplexSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(f[i] * m.weight(i));
  return s.value();
}

}  // namespace condop
