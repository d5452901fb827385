#include <doctest.h>

#include <cmath>
#include <random>

#include "condop/classify.hpp"
#include "condop/errors.hpp"
#include "condop/examples_gen.hpp"
#include "support.hpp"

using namespace condop;

namespace {

CondOpSpec two_point(CFun u, CFun w) {
  return CondOpSpec(MeasureSpace::uniform(2), Partition::single_block(2), std::move(u),
                    std::move(w));
}

double ref_family(const CondOpSpec& s, int depth) {
  const auto p = to_problem(s);
  return ref::family_residual(ref::condop_matrix(p.mu, p.label, p.u, p.w), p.mu, depth);
}

double ref_normal(const CondOpSpec& s) {
  const auto p = to_problem(s);
  return ref::normal_residual(ref::condop_matrix(p.mu, p.label, p.u, p.w), p.mu);
}

}  // namespace

TEST_CASE("centered closed form fixtures") {
  SUBCASE("equality case u = (1, 2), w = (3, 6)") {
    const auto s = two_point(CFun{1.0, 2.0}, CFun{3.0, 6.0});
    CHECK(std::norm(s.e_uw()[0]) == doctest::Approx(56.25));
    CHECK(s.e_abs_u2()[0].real() == doctest::Approx(2.5));
    CHECK(s.e_abs_w2()[0].real() == doctest::Approx(22.5));
    const auto v = centered_closed_form(s, 1e-9);
    CHECK(v.status == Status::yes);
    CHECK(ref_family(s, 4) <= 1e-12);
  }
  SUBCASE("null product is indeterminate and centered") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0});
    const auto v = centered_closed_form(s, 1e-9);
    CHECK(v.status == Status::indeterminate);
    CHECK(v.criterion_id == "gap_off_support");
    CHECK(centered_supports(s).necessary.empty());
    CHECK(centered_oracle(s, 4, 1e-8).holds);
    CHECK(ref_family(s, 4) <= 1e-12);
  }
  SUBCASE("u = (1, 0), w = (1, 1) is not centered") {
    const auto s = two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0});
    const auto v = centered_closed_form(s, 1e-9);
    CHECK(v.status == Status::no);
    CHECK(v.witness == std::vector<std::size_t>{0, 1});
    CHECK(!centered_oracle(s, 4, 1e-8).holds);
    CHECK(ref_family(s, 4) > 1e-3);
  }
}

TEST_CASE("unit weight specialization") {
  SUBCASE("block-constant u") {
    const CondOpSpec s(MeasureSpace::from_weights({1.0, 2.0, 3.0}), Partition({{0, 1}, {2}}, 3),
                       CFun{2.0, 2.0, -1.0}, CFun::constant(3, 1.0));
    CHECK(centered_eu_special(s, 1e-9).status == Status::yes);
    CHECK(normal_closed_form(s, 1e-9).status == Status::yes);
  }
  SUBCASE("exponential on a symmetric pair") {
    const auto s = two_point(CFun{std::exp(-1.0), std::exp(1.0)}, CFun{1.0, 1.0});
    CHECK(std::abs(s.e_u()[0] - std::cosh(1.0)) < 1e-15);
    CHECK(std::abs(s.e_abs_u2()[0] - std::cosh(2.0)) < 1e-14);
    CHECK(centered_eu_special(s, 1e-9).status == Status::no);
    CHECK(normal_closed_form(s, 1e-9).status == Status::no);
    CHECK(ref_family(s, 4) > 1e-3);
  }
  SUBCASE("u = (1, 0)") {
    const auto s = two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0});
    CHECK(centered_eu_special(s, 1e-9).status == Status::no);
    const auto n = normal_closed_form(s, 1e-9);
    CHECK(n.status == Status::no);
    CHECK(ref_normal(s) > 1e-3);
  }
  SUBCASE("rejects w != 1") {
    CHECK_THROWS_AS(centered_eu_special(two_point(CFun{1.0, 0.0}, CFun{1.0, 2.0}), 1e-9),
                    ArgumentError);
  }
  SUBCASE("mean-free u is left open, and T^2 = 0 makes it centered") {
    const auto s = two_point(CFun{1.0, -1.0}, CFun{1.0, 1.0});
    const auto v = centered_eu_special(s, 1e-9);
    CHECK(v.status == Status::indeterminate);
    CHECK(centered_oracle(s, 4, 1e-8).holds);
    CHECK(ref_family(s, 4) <= 1e-12);
  }
}

TEST_CASE("normal closed form fixtures") {
  const auto sa = two_point(CFun{1.0, 2.0}, CFun{1.0, 2.0});
  CHECK(normal_closed_form(sa, 1e-9).status == Status::yes);
  CHECK(ref_normal(sa) <= 1e-9);
}

TEST_CASE("equivalence suite") {
  SUBCASE("block-constant u: all agree on yes") {
    const CondOpSpec s(MeasureSpace::from_weights({1.0, 2.0, 3.0, 4.0}),
                       Partition({{0, 1}, {2, 3}}, 4), CFun{{1.0, 1.0}, {1.0, 1.0}, 3.0, 3.0},
                       CFun::constant(4, 1.0));
    const auto r = equivalence_suite(s);
    CHECK(r.block_constant);
    CHECK(r.agree);
  }
  SUBCASE("exponential pair: all agree on no") {
    const auto r = equivalence_suite(two_point(CFun{std::exp(-1.0), std::exp(1.0)}, CFun{1.0, 1.0}));
    CHECK(!r.block_constant);
    CHECK(r.centered_closed.status == Status::no);
    CHECK(r.normal_closed.status == Status::no);
    CHECK(!r.centered_oracle.holds);
    CHECK(!r.normal_oracle.holds);
    CHECK(r.agree);
  }
  SUBCASE("support precondition") {
    CHECK_THROWS_AS(equivalence_suite(two_point(CFun{1.0, -1.0}, CFun{1.0, 1.0})),
                    ArgumentError);
    CHECK_THROWS_AS(equivalence_suite(two_point(CFun{1.0, 0.0}, CFun{1.0, 2.0})),
                    ArgumentError);
  }
  SUBCASE("random u with matching supports") {
    std::mt19937 g(71);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 2 + g() % 8;
      std::vector<std::size_t> labels(n);
      const std::size_t nb = 1 + g() % n;
      for (std::size_t i = 0; i < n; ++i) labels[i] = i < nb ? i : g() % nb;
      std::vector<double> mu(n);
      for (auto& x : mu) x = 0.1 + std::abs(nd(g));
      const auto part = Partition::from_labels(labels);
      std::vector<cplx> u(n);
      const bool constant = t % 2 == 0;
      for (std::size_t b = 0; b < part.block_count(); ++b) {
        const cplx c(1.0 + std::abs(nd(g)), nd(g));
        for (const auto i : part.block(b)) u[i] = constant ? c : c + cplx(0.3 * nd(g), 0.0);
      }
      const CondOpSpec s(MeasureSpace::from_weights(mu), part, CFun(u), CFun::constant(n, 1.0));
      const auto r = equivalence_suite(s);
      CHECK(r.agree);
      CHECK(r.block_constant == (ref_normal(s) <= 1e-9));
    }
  }
}

TEST_CASE("closed forms against the reference oracles on random specs") {
  std::mt19937 g(99);
  int decided = 0;
  for (int t = 0; t < 300; ++t) {
    const std::uint64_t seed = g();
    const std::size_t n = 2 + g() % 9;
    const std::size_t nb = 1 + g() % n;
    const CondOpSpec s = t % 3 == 0   ? gen_equality_case(seed, n, nb)
                         : t % 3 == 1 ? gen_random(seed, n, nb)
                                      : gen_degenerate(seed, n, nb);
    const auto c = centered_closed_form(s, 1e-9);
    const double fam = ref_family(s, 4);
    if (c.status == Status::yes) CHECK(fam <= 1e-8);
    if (c.status == Status::no) CHECK(fam > 1e-7);
    const auto nv = normal_closed_form(s, 1e-9);
    const double nr = ref_normal(s);
    if (nv.status == Status::yes) CHECK(nr <= 1e-9);
    if (nv.status == Status::no) CHECK(nr > 1e-6);
    decided += c.status != Status::indeterminate;
  }
  CHECK(decided > 100);
}

TEST_CASE("point spectrum") {
  SUBCASE("projection") {
    const CondOpSpec s(MeasureSpace::from_weights({1.0, 2.0, 3.0}), Partition({{0, 1}, {2}}, 3),
                       CFun::constant(3, 1.0), CFun::constant(3, 1.0));
    const auto r = point_spectrum_formula(s);
    REQUIRE(r.nonzero_level_values.size() == 1);
    CHECK(std::abs(r.nonzero_level_values[0] - 1.0) < 1e-12);
    CHECK(r.sets_match);
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(std::abs(r.eigenvalues[0].value) < 1e-12);
    CHECK(r.eigenvalues[0].multiplicity == 1);
    CHECK(r.eigenvalues[1].multiplicity == 2);
  }
  SUBCASE("u = (1, 0), w = 1") {
    const auto s = two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0});
    const auto r = joint_spectrum_check(s);
    REQUIRE(r.nonzero_eigenvalues.size() == 1);
    CHECK(std::abs(r.nonzero_eigenvalues[0] - 0.5) < 1e-12);
    CHECK(r.sets_match);
    bool any_false = false;
    for (const auto& e : r.eigenvalues) {
      if (std::abs(e.value - 0.5) < 1e-9) CHECK(!e.joint);
      any_false |= !e.joint;
    }
    CHECK(any_false);
    // T* (1, 1) = (1, 0), not (1/2)(1, 1)
    const auto ts = adjoint_apply(s, CFun{1.0, 1.0});
    CHECK(std::abs(ts[0] - 1.0) < 1e-15);
    CHECK(std::abs(ts[1]) < 1e-15);
  }
  SUBCASE("nilpotent pair has empty nonzero spectrum") {
    const auto r = point_spectrum_formula(two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0}));
    CHECK(r.nonzero_level_values.empty());
    CHECK(r.nonzero_eigenvalues.empty());
    CHECK(r.sets_match);
  }
  SUBCASE("self-adjoint and equality cases are all joint") {
    const auto sa = joint_spectrum_check(two_point(CFun{1.0, 2.0}, CFun{1.0, 2.0}));
    for (const auto& e : sa.eigenvalues) CHECK(e.joint);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto r = joint_spectrum_check(gen_equality_case(seed, 9, 3));
      CHECK(r.equality_case);
      CHECK(r.sets_match);
      for (const auto& e : r.eigenvalues) CHECK(e.joint);
    }
  }
  SUBCASE("random specs: formula matches the reference eigenvalues") {
    std::mt19937 g(123);
    for (int t = 0; t < 60; ++t) {
      const auto s = gen_random(g(), 2 + g() % 20, 1 + g() % 2);
      const auto r = point_spectrum_formula(s);
      CHECK(r.sets_match);
      const auto p = to_problem(s);
      const auto a = ref::condop_matrix(p.mu, p.label, p.u, p.w);
      const double na = ref::norm(a, p.mu);
      for (const auto& lam : ref::eigenvalues(a)) {
        if (std::abs(lam) <= 1e-7 * na) continue;
        double best = INFINITY;
        for (const auto& v : r.nonzero_level_values) best = std::min(best, std::abs(v - lam));
        CHECK(best <= 1e-8 * na);
      }
    }
  }
}
