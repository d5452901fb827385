#pragma once

#include "condop/condop_core.hpp"
#include "oracles.hpp"

inline condop::CondOpSpec to_spec(const ref::Problem& p) {
  std::vector<std::size_t> labels(p.label.begin(), p.label.end());
  return condop::CondOpSpec(condop::MeasureSpace::from_weights(p.mu),
                            condop::Partition::from_labels(labels),
                            condop::CFun(p.u), condop::CFun(p.w));
}

inline ref::Problem to_problem(const condop::CondOpSpec& s) {
  ref::Problem p;
  p.mu.assign(s.space().weights().begin(), s.space().weights().end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    p.label.push_back(static_cast<int>(s.partition().atom_of(i)));
  }
  p.u = s.u().values();
  p.w = s.w().values();
  return p;
}

inline ref::Mat ref_matrix(const condop::CondOpSpec& s) {
  const auto p = to_problem(s);
  return ref::condop_matrix(p.mu, p.label, p.u, p.w);
}

inline ref::Vec to_vec(const condop::CFun& f) {
  ref::Vec v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v(static_cast<Eigen::Index>(i)) = f[i];
  return v;
}

inline condop::CFun random_fun(std::mt19937& g, std::size_t n) {
  std::normal_distribution<double> nd;
  std::vector<condop::cplx> v(n);
  for (auto& z : v) z = {nd(g), nd(g)};
  return condop::CFun(std::move(v));
}

inline double max_diff(const condop::CFun& a, const condop::CFun& b) {
  return (a - b).max_abs();
}
