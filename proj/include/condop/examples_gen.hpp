#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "condop/condop_core.hpp"
#include "condop/kernel_ops.hpp"

namespace condop {

enum class RecipeKind {
  example212,     // strip algebra on the unit square, midpoint grid
  example213,     // symmetric-pair algebra on [-1, 1]
  random,         // complex Gaussian u, w; log-uniform weights
  equality_case,  // w = a conj(u), a block-constant
  null_product,   // E(uw) = 0 on every block
  degenerate,     // mix of zero-u, zero-w, null-product and random blocks
  mean_free,      // E(u) = 0 on every block, E(uw) != 0
};

const char* to_string(RecipeKind k) noexcept;
/// Throws ArgumentError on an unknown name.
RecipeKind recipe_kind_from_string(const std::string& name);

struct InstanceRecipe {
  RecipeKind kind = RecipeKind::random;
  std::uint64_t seed = 0;
  std::size_t n_points = 8;
  std::size_t n_blocks = 3;
  double magnitude = 1.0;
  /// Grid resolution for example212 (n x n cells).
  std::size_t resolution = 16;
  /// Positive abscissae for example213.
  std::vector<double> grid;

  bool operator==(const InstanceRecipe&) const = default;
};

/// Validates the recipe and builds the instance.
CondOpSpec realize(const InstanceRecipe& recipe);

/// Per-column comparison of E|u|^2 E|w|^2 with |E(uw)|^2 for the strip
/// example, against the closed forms 4/(4+x), (4+x)/2 and 64(4+x)/(x+12)^2.
struct StripAudit {
  std::vector<double> x;
  std::vector<double> e_abs_u2;
  std::vector<double> e_abs_w2;
  std::vector<double> product;       // E|u|^2 E|w|^2
  std::vector<double> e_uw_sq;       // |E(uw)|^2
  std::vector<double> closed_e_uw_sq;
  std::vector<double> gap;           // product - e_uw_sq
  std::vector<double> closed_gap;    // 2 - closed_e_uw_sq
  double max_product_error = 0.0;    // max |product - 2|
  double max_e_uw_sq_error = 0.0;    // max |e_uw_sq - closed|
  double min_gap = 0.0;
  /// Whether E|u|^2 E|w|^2 = |E(uw)|^2 holds on every column within 1e-2.
  /// It does not: the gap stays near 2 - 64(4+x)/(x+12)^2 > 0.1.
  bool equality_holds = false;
};

struct StripExample {
  CondOpSpec spec;
  StripAudit audit;
};

/// X = [0,1]^2 on an n x n midpoint grid (cell mass 1/n^2), blocks = columns,
/// u = y^(x/8), w = sqrt((4+x) y). Requires n >= 2.
StripExample gen_example_212(std::size_t n);

/// Points +-x for x in `grid` (distinct, in (0, 1]), equal masses summing to
/// 1, blocks {-x, x}, u = e^t, w = 1.
CondOpSpec gen_example_213(std::span<const double> grid);

/// Reproducible from seed. Weights are magnitude * 10^U(-2, 2); u and w have
/// independent standard normal real and imaginary parts; block sizes are
/// random and non-empty. Requires 1 <= n_blocks <= n_points.
CondOpSpec gen_random(std::uint64_t seed, std::size_t n_points,
                      std::size_t n_blocks, double magnitude = 1.0);

/// w = a conj(u) with a complex Gaussian per block, forcing
/// |E(uw)|^2 = E|u|^2 E|w|^2. u is redrawn if it nearly vanishes on a block.
CondOpSpec gen_equality_case(std::uint64_t seed, std::size_t n_points,
                             std::size_t n_blocks);

/// w is projected per block so that E(uw) = 0 (T^2 = 0).
CondOpSpec gen_null_product(std::uint64_t seed, std::size_t n_points,
                            std::size_t n_blocks, double magnitude = 1.0);

/// Blocks cycle through u = 0, w = 0, E(uw) = 0 and unconstrained.
CondOpSpec gen_degenerate(std::uint64_t seed, std::size_t n_points,
                          std::size_t n_blocks);

/// u has zero block mean; w generic. Blocks of size 1 get u = 0.
CondOpSpec gen_mean_free(std::uint64_t seed, std::size_t n_points,
                         std::size_t n_blocks);

/// u = (a, a), w = (b, -b) on two equal-mass points in one block.
CondOpSpec gen_scaled_pair(std::uint64_t seed);

/// Kernel on n points with log-uniform weights (not normalized) and complex
/// Gaussian entries; with row_constant, k(x, y) depends on x only.
KernelSpec gen_random_kernel(std::uint64_t seed, std::size_t n,
                             bool row_constant = false);

/// Per-trial seed derived from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

struct SearchOptions {
  int trials = 1000;
  int depth = 4;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  double tau = 1e-9;
  double supp_tol = kDefaultSuppTol;
  std::size_t max_points = 24;
};

struct SearchFinding {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string family;
  double oracle_residual = 0.0;
  double criterion_residual = 0.0;
};

/// Census of a randomized search for centered operators that violate
/// |E(uw)|^2 = E|u|^2 E|w|^2 on S(E(uw)E(w)E(u)).
struct SearchReport {
  int trials = 0;
  int yes = 0;
  int no = 0;
  int indeterminate = 0;
  /// Oracle-centered specs whose identity fails on the necessary support.
  std::vector<SearchFinding> violations;
  /// Closed-form "yes" specs the oracle rejects.
  std::vector<SearchFinding> sufficient_failures;
  /// Indeterminate verdicts, split by the oracle's answer.
  int indeterminate_centered = 0;
  int indeterminate_not_centered = 0;
  /// Trials where the identity fails only off / also on the necessary support.
  int fails_off_support_only = 0;
  int fails_on_support = 0;
  int skipped_nonconvergence = 0;
  std::vector<SearchFinding> gap_examples;  // first few indeterminate-centered
};

SearchReport counterexample_search(const SearchOptions& opts);

}  // namespace condop
