#include "condop/examples_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "condop/classify.hpp"
#include "condop/errors.hpp"
#include "condop/matrix_oracle.hpp"

namespace condop {

const char* to_string(RecipeKind k) noexcept {
  switch (k) {
    case RecipeKind::example212: return "example212";
    case RecipeKind::example213: return "example213";
    case RecipeKind::random: return "random";
    case RecipeKind::equality_case: return "equality_case";
    case RecipeKind::null_product: return "null_product";
    case RecipeKind::degenerate: return "degenerate";
    case RecipeKind::mean_free: return "mean_free";
  }
  return "?";
}

RecipeKind recipe_kind_from_string(const std::string& name) {
  for (auto k : {RecipeKind::example212, RecipeKind::example213,
                 RecipeKind::random, RecipeKind::equality_case,
                 RecipeKind::null_product, RecipeKind::degenerate,
                 RecipeKind::mean_free}) {
    if (name == to_string(k)) return k;
  }
  throw ArgumentError("unknown recipe kind '" + name + "'");
}

CondOpSpec realize(const InstanceRecipe& r) {
  switch (r.kind) {
    case RecipeKind::example212: return gen_example_212(r.resolution).spec;
    case RecipeKind::example213: return gen_example_213(r.grid);
    case RecipeKind::random:
      return gen_random(r.seed, r.n_points, r.n_blocks, r.magnitude);
    case RecipeKind::equality_case:
      return gen_equality_case(r.seed, r.n_points, r.n_blocks);
    case RecipeKind::null_product:
      return gen_null_product(r.seed, r.n_points, r.n_blocks, r.magnitude);
    case RecipeKind::degenerate:
      return gen_degenerate(r.seed, r.n_points, r.n_blocks);
    case RecipeKind::mean_free:
      return gen_mean_free(r.seed, r.n_points, r.n_blocks);
  }
  throw ArgumentError("unknown recipe kind");
}

StripExample gen_example_212(std::size_t n) {
  if (n < 2) throw ArgumentError("example212: resolution must be >= 2");
  const double h = 1.0 / static_cast<double>(n);
  std::vector<std::string> ids;
  std::vector<double> weights;
  std::vector<cplx> u, w;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * h;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = (static_cast<double>(j) + 0.5) * h;
      ids.push_back("x" + std::to_string(i) + "y" + std::to_string(j));
      weights.push_back(h * h);
      u.emplace_back(std::pow(y, x / 8.0), 0.0);
      w.emplace_back(std::sqrt((4.0 + x) * y), 0.0);
      labels.push_back(i);
    }
  }
  CondOpSpec spec(MeasureSpace(std::move(ids), std::move(weights)),
                  Partition::from_labels(labels), CFun(std::move(u)),
                  CFun(std::move(w)));

  StripAudit a;
  a.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * h;
    const std::size_t p = spec.partition().block(i).front();
    const double eu = spec.e_abs_u2()[p].real();
    const double ew = spec.e_abs_w2()[p].real();
    const double uw2 = std::norm(spec.e_uw()[p]);
    const double closed = 64.0 * (4.0 + x) / ((x + 12.0) * (x + 12.0));
    a.x.push_back(x);
    a.e_abs_u2.push_back(eu);
    a.e_abs_w2.push_back(ew);
    a.product.push_back(eu * ew);
    a.e_uw_sq.push_back(uw2);
    a.closed_e_uw_sq.push_back(closed);
    a.gap.push_back(eu * ew - uw2);
    a.closed_gap.push_back(2.0 - closed);
    a.max_product_error = std::max(a.max_product_error, std::abs(eu * ew - 2.0));
    a.max_e_uw_sq_error = std::max(a.max_e_uw_sq_error, std::abs(uw2 - closed));
    a.min_gap = std::min(a.min_gap, eu * ew - uw2);
  }
  a.equality_holds = std::all_of(a.gap.begin(), a.gap.end(),
                                 [](double g) { return std::abs(g) <= 1e-2; });
  return {std::move(spec), std::move(a)};
}

CondOpSpec gen_example_213(std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("example213: grid must not be empty");
  std::set<double> seen;
  for (const double x : grid) {
    if (!(x > 0.0 && x <= 1.0)) {
      throw ArgumentError("example213: grid values must lie in (0, 1]");
    }
    if (!seen.insert(x).second) {
      throw ArgumentError("example213: grid values must be distinct");
    }
  }
  const auto m = grid.size();
  const double mass = 1.0 / (2.0 * static_cast<double>(m));
  std::vector<std::string> ids;
  std::vector<double> weights(2 * m, mass);
  std::vector<cplx> u;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t k = 0; k < m; ++k) {
    ids.push_back("-x" + std::to_string(k));
    ids.push_back("+x" + std::to_string(k));
    u.emplace_back(std::exp(-grid[k]), 0.0);
    u.emplace_back(std::exp(grid[k]), 0.0);
    blocks.push_back({2 * k, 2 * k + 1});
  }
  return CondOpSpec(MeasureSpace(std::move(ids), std::move(weights)),
                    Partition(std::move(blocks), 2 * m), CFun(std::move(u)),
                    CFun::constant(2 * m, 1.0));
}

namespace {

void require_blocks(std::size_t n_points, std::size_t n_blocks) {
  if (n_points < 1 || n_blocks < 1 || n_blocks > n_points) {
    throw ArgumentError("need 1 <= n_blocks <= n_points (got " +
                        std::to_string(n_blocks) + " blocks, " +
                        std::to_string(n_points) + " points)");
  }
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  cplx gaussian() {
    std::normal_distribution<double> nd(0.0, 1.0);
    const double re = nd(rng_);
    const double im = nd(rng_);
    return {re, im};
  }
  std::vector<cplx> gaussians(std::size_t n) {
    std::vector<cplx> v(n);
    for (auto& z : v) z = gaussian();
    return v;
  }
  std::vector<double> log_uniform_weights(std::size_t n, double magnitude) {
    std::vector<double> w(n);
    for (auto& x : w) x = magnitude * std::pow(10.0, uniform(-2.0, 2.0));
    return w;
  }
  /// Random labels with every one of n_blocks labels used.
  std::vector<std::size_t> block_labels(std::size_t n_points, std::size_t n_blocks) {
    std::vector<std::size_t> order(n_points);
    for (std::size_t i = 0; i < n_points; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    std::vector<std::size_t> labels(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
      labels[order[k]] = k < n_blocks ? k : index(n_blocks);
    }
    return labels;
  }

 private:
  std::mt19937_64 rng_;
};

cplx block_weighted_sum(const std::vector<cplx>& f, const std::vector<double>& mu,
                        std::span<const std::size_t> block) {
  cplx s = 0.0;
  for (const auto i : block) s += f[i] * mu[i];
  return s;
}

/// w <- w - (sum u w mu / sum |u|^2 mu) conj(u) on one block, so sum u w mu = 0.
void project_out(std::vector<cplx>& w, const std::vector<cplx>& u,
                 const std::vector<double>& mu, std::span<const std::size_t> block) {
  cplx uw = 0.0;
  double uu = 0.0;
  for (const auto i : block) {
    uw += u[i] * w[i] * mu[i];
    uu += std::norm(u[i]) * mu[i];
  }
  if (uu == 0.0) return;
  if (block.size() == 1) {
    w[block[0]] = 0.0;
    return;
  }
  const cplx c = uw / uu;
  for (const auto i : block) w[i] -= c * std::conj(u[i]);
}

}  // namespace

CondOpSpec gen_random(std::uint64_t seed, std::size_t n_points,
                      std::size_t n_blocks, double magnitude) {
  require_blocks(n_points, n_blocks);
  if (!(magnitude > 0.0)) throw ArgumentError("magnitude must be > 0");
  Sampler s(seed);
  auto mu = s.log_uniform_weights(n_points, magnitude);
  const auto labels = s.block_labels(n_points, n_blocks);
  auto u = s.gaussians(n_points);
  auto w = s.gaussians(n_points);
  return CondOpSpec(MeasureSpace::from_weights(std::move(mu)),
                    Partition::from_labels(labels), CFun(std::move(u)),
                    CFun(std::move(w)));
}

CondOpSpec gen_equality_case(std::uint64_t seed, std::size_t n_points,
                             std::size_t n_blocks) {
  require_blocks(n_points, n_blocks);
  Sampler s(seed);
  auto mu = s.log_uniform_weights(n_points, 1.0);
  const auto labels = s.block_labels(n_points, n_blocks);
  const auto part = Partition::from_labels(labels);
  std::vector<cplx> u;
  for (;;) {
    u = s.gaussians(n_points);
    bool ok = true;
    for (const auto& b : part.blocks()) {
      double m = 0.0;
      for (const auto i : b) m = std::max(m, std::abs(u[i]));
      ok = ok && m > 1e-3;
    }
    if (ok) break;
  }
  std::vector<cplx> w(n_points);
  for (const auto& b : part.blocks()) {
    const cplx a = s.gaussian();
    for (const auto i : b) w[i] = a * std::conj(u[i]);
  }
  return CondOpSpec(MeasureSpace::from_weights(std::move(mu)), part,
                    CFun(std::move(u)), CFun(std::move(w)));
}

CondOpSpec gen_null_product(std::uint64_t seed, std::size_t n_points,
                            std::size_t n_blocks, double magnitude) {
  require_blocks(n_points, n_blocks);
  Sampler s(seed);
  auto mu = s.log_uniform_weights(n_points, magnitude);
  const auto part = Partition::from_labels(s.block_labels(n_points, n_blocks));
  auto u = s.gaussians(n_points);
  auto w = s.gaussians(n_points);
  for (const auto& b : part.blocks()) project_out(w, u, mu, b);
  return CondOpSpec(MeasureSpace::from_weights(std::move(mu)), part,
                    CFun(std::move(u)), CFun(std::move(w)));
}

CondOpSpec gen_degenerate(std::uint64_t seed, std::size_t n_points,
                          std::size_t n_blocks) {
  require_blocks(n_points, n_blocks);
  Sampler s(seed);
  auto mu = s.log_uniform_weights(n_points, 1.0);
  const auto part = Partition::from_labels(s.block_labels(n_points, n_blocks));
  auto u = s.gaussians(n_points);
  auto w = s.gaussians(n_points);
  for (std::size_t b = 0; b < part.block_count(); ++b) {
    const auto block = part.block(b);
    switch (b % 4) {
      case 0:
        for (const auto i : block) u[i] = 0.0;
        break;
      case 1:
        for (const auto i : block) w[i] = 0.0;
        break;
      case 2:
        project_out(w, u, mu, block);
        break;
      default:
        break;
    }
  }
  return CondOpSpec(MeasureSpace::from_weights(std::move(mu)), part,
                    CFun(std::move(u)), CFun(std::move(w)));
}

CondOpSpec gen_mean_free(std::uint64_t seed, std::size_t n_points,
                         std::size_t n_blocks) {
  require_blocks(n_points, n_blocks);
  Sampler s(seed);
  auto mu = s.log_uniform_weights(n_points, 1.0);
  const auto part = Partition::from_labels(s.block_labels(n_points, n_blocks));
  auto u = s.gaussians(n_points);
  auto w = s.gaussians(n_points);
  for (const auto& b : part.blocks()) {
    double mass = 0.0;
    for (const auto i : b) mass += mu[i];
    const cplx mean = block_weighted_sum(u, mu, b) / mass;
    for (const auto i : b) u[i] = b.size() == 1 ? 0.0 : u[i] - mean;
  }
  return CondOpSpec(MeasureSpace::from_weights(std::move(mu)), part,
                    CFun(std::move(u)), CFun(std::move(w)));
}

CondOpSpec gen_scaled_pair(std::uint64_t seed) {
  Sampler s(seed);
  const cplx a = s.gaussian();
  const cplx b = s.gaussian();
  return CondOpSpec(MeasureSpace::uniform(2), Partition::single_block(2),
                    CFun{a, a}, CFun{b, -b});
}

KernelSpec gen_random_kernel(std::uint64_t seed, std::size_t n, bool row_constant) {
  if (n < 1) throw ArgumentError("kernel needs at least one point");
  Sampler s(seed);
  auto mu = s.log_uniform_weights(n, 1.0);
  std::vector<cplx> k(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    const cplx c = s.gaussian();
    for (std::size_t y = 0; y < n; ++y) k[x * n + y] = row_constant ? c : s.gaussian();
  }
  return KernelSpec(MeasureSpace::from_weights(std::move(mu)), std::move(k));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SearchReport counterexample_search(const SearchOptions& opts) {
  if (opts.trials < 1) throw ArgumentError("search: trials must be >= 1");
  if (opts.max_points < 2) throw ArgumentError("search: max_points must be >= 2");
  SearchReport rep;
  rep.trials = opts.trials;
  static constexpr const char* kFamilies[] = {
      "random", "equality_case", "null_product", "degenerate", "mean_free",
      "scaled_pair"};
  constexpr int kFamilyCount = 6;

  for (int t = 0; t < opts.trials; ++t) {
    const std::uint64_t seed = derive_seed(opts.seed, static_cast<std::uint64_t>(t));
    const int family = t % kFamilyCount;
    std::mt19937_64 shape(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, opts.max_points)(shape);
    const std::size_t nb = std::uniform_int_distribution<std::size_t>(1, n)(shape);

    const CondOpSpec spec = [&] {
      switch (family) {
        case 0: return gen_random(seed, n, nb);
        case 1: return gen_equality_case(seed, n, nb);
        case 2: return gen_null_product(seed, n, nb);
        case 3: return gen_degenerate(seed, n, nb);
        case 4: return gen_mean_free(seed, n, nb);
        default: return gen_scaled_pair(seed);
      }
    }();

    const auto verdict = centered_closed_form(spec, opts.tau, opts.supp_tol);
    OracleVerdict ov;
    try {
      ov = centered_oracle(spec, opts.depth, opts.tol);
    } catch (const NumericalError&) {
      ++rep.skipped_nonconvergence;
      continue;
    }
    const SearchFinding finding{t, seed, kFamilies[family], ov.residual,
                                verdict.residual};
    switch (verdict.status) {
      case Status::yes:
        ++rep.yes;
        if (!ov.holds) rep.sufficient_failures.push_back(finding);
        break;
      case Status::no:
        ++rep.no;
        ++rep.fails_on_support;
        if (ov.holds) rep.violations.push_back(finding);
        break;
      case Status::indeterminate:
        ++rep.indeterminate;
        ++rep.fails_off_support_only;
        if (ov.holds) {
          ++rep.indeterminate_centered;
          if (rep.gap_examples.size() < 5) rep.gap_examples.push_back(finding);
        } else {
          ++rep.indeterminate_not_centered;
        }
        break;
    }
  }
  return rep;
}

}  // namespace condop
