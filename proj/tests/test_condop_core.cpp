#include <doctest.h>

#include <cmath>
#include <random>

#include "condop/condop_core.hpp"
#include "condop/errors.hpp"
#include "support.hpp"

using namespace condop;

namespace {

CondOpSpec two_point(CFun u, CFun w) {
  return CondOpSpec(MeasureSpace::uniform(2), Partition::single_block(2), std::move(u),
                    std::move(w));
}

ref::Mat form_matrix(const MultiplierForm& f, const CondOpSpec& s) {
  const auto p = to_problem(s);
  return ref::condop_matrix(p.mu, p.label, f.inner.values(), f.outer.values());
}

}  // namespace

TEST_CASE("apply on fixtures") {
  SUBCASE("u = w = 1 reduces to E") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0});
    const auto tf = apply(s, CFun{2.0, 4.0});
    CHECK(std::abs(tf[0] - 3.0) < 1e-15);
    CHECK(std::abs(tf[1] - 3.0) < 1e-15);
  }
  SUBCASE("nilpotent pair") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0});
    const auto tf = apply(s, CFun{1.0, 1.0});
    CHECK(std::abs(tf[0] - 1.0) < 1e-15);
    CHECK(std::abs(tf[1] + 1.0) < 1e-15);
    std::mt19937 g(3);
    for (int i = 0; i < 10; ++i) {
      const auto f = random_fun(g, 2);
      CHECK(power_apply(s, 2, f).max_abs() < 1e-15);
      CHECK(apply(s, apply(s, f)).max_abs() < 1e-15);
    }
  }
  SUBCASE("u = w = (1, 2)") {
    const auto s = two_point(CFun{1.0, 2.0}, CFun{1.0, 2.0});
    CHECK(std::abs(s.e_uw()[0] - 2.5) < 1e-15);
    std::mt19937 g(4);
    const auto f = random_fun(g, 2);
    CHECK(max_diff(power_apply(s, 2, f), cplx(2.5) * apply(s, f)) < 1e-13);
  }
  SUBCASE("shape mismatch") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0});
    CHECK_THROWS_AS(apply(s, CFun{1.0}), StructuralError);
    CHECK_THROWS_AS(CondOpSpec(MeasureSpace::uniform(3), Partition::single_block(3),
                               CFun{1.0, 1.0}, CFun{1.0, 1.0, 1.0}),
                    StructuralError);
  }
  SUBCASE("power_apply rejects n < 1") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0});
    CHECK_THROWS_AS(power_apply(s, 0, CFun{1.0, 1.0}), ArgumentError);
    CHECK(power_apply(s, 1, CFun{1.0, 5.0}) == apply(s, CFun{1.0, 5.0}));
  }
}

TEST_CASE("norm formula on fixtures") {
  CHECK(norm_formula(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0})) == doctest::Approx(1.0));
  CHECK(norm_formula(two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0})) == doctest::Approx(1.0));
  CHECK(norm_formula(two_point(CFun{2.0, 0.0}, CFun{1.0, 1.0})) ==
        doctest::Approx(std::sqrt(2.0)));
  // explicit singular values of [[1, 0], [1, 0]] in B-space
  const auto s = two_point(CFun{2.0, 0.0}, CFun{1.0, 1.0});
  CHECK(ref::norm(ref_matrix(s), {0.5, 0.5}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("random specs against the reference matrix") {
  std::mt19937 g(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(g() % 9);
    const int nb = 1 + static_cast<int>(g() % n);
    const auto prob = ref::random_problem(g, n, nb);
    const auto s = to_spec(prob);
    const auto a = ref_matrix(s);
    const auto& mu = prob.mu;
    const auto f = random_fun(g, s.size());
    const double scale = ref::norm(a, mu);

    const ref::Vec tf = a * to_vec(f);
    CHECK((to_vec(apply(s, f)) - tf).cwiseAbs().maxCoeff() <=
          1e-12 * scale * f.max_abs() * 10);
    const ref::Vec tsf = ref::adjoint(a, mu) * to_vec(f);
    CHECK((to_vec(adjoint_apply(s, f)) - tsf).cwiseAbs().maxCoeff() <=
          1e-11 * scale * f.max_abs() * 10);

    CFun it = f;
    for (int k = 1; k <= 6; ++k) {
      it = apply(s, it);
      const auto pk = power_apply(s, k, f);
      CHECK(max_diff(pk, it) <= 1e-10 * std::max(it.max_abs(), 1e-300) + 1e-14);
    }

    CHECK(std::abs(norm_formula(s) - scale) <= 1e-9 * scale);

    const auto as = ref::adjoint(a, mu);
    for (const double p : {0.5, 1.0, 1.5, 2.0, 3.0}) {
      const auto star_t = form_matrix(positive_power_form(s, p, Side::star_t), s);
      const auto t_star = form_matrix(positive_power_form(s, p, Side::t_star), s);
      CHECK(ref::rel_entry(star_t, ref::psd_power(as * a, mu, p), mu) <= 1e-8);
      CHECK(ref::rel_entry(t_star, ref::psd_power(a * as, mu, p), mu) <= 1e-8);
    }
    CHECK(ref::rel_entry(form_matrix(positive_power_form(s, 1.0, Side::star_t), s), as * a,
                         mu) <= 1e-10);

    // semigroup law
    for (const auto side : {Side::star_t, Side::t_star}) {
      const auto lhs = positive_power(s, 0.5, side, positive_power(s, 1.5, side, f));
      const auto rhs = positive_power(s, 2.0, side, f);
      CHECK(max_diff(lhs, rhs) <= 1e-10 * std::max(rhs.max_abs(), 1e-300) + 1e-14);
    }

    // polar parts
    const auto parts = polar_parts(s);
    const auto mod = form_matrix(parts.modulus, s);
    const auto iso = form_matrix(parts.isometry, s);
    CHECK(ref::norm(iso * mod - a, mu) <= 1e-9 * scale);
    CHECK(ref::norm(iso * ref::adjoint(iso, mu) * iso - iso, mu) <= 1e-9);
    CHECK(ref::rel_entry(mod, ref::psd_power(as * a, mu, 0.5), mu) <= 1e-8);
    const ref::Mat bm = ref::to_b(mod, mu);
    CHECK((bm - bm.adjoint()).norm() <= 1e-12 * std::max(scale, 1.0));
    Eigen::SelfAdjointEigenSolver<ref::Mat> es(0.5 * (bm + bm.adjoint()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);

    // Aluthge against |T|^(1/2) U |T|^(1/2) built from the reference matrices
    const auto root = ref::psd_power(as * a, mu, 0.25);
    const auto alu = form_matrix(aluthge_form(s), s);
    CHECK(ref::norm(alu - root * iso * root, mu) <= 1e-8 * scale);
    const ref::Vec alu_f = root * iso * root * to_vec(f);
    CHECK((to_vec(aluthge_apply(s, f)) - alu_f).cwiseAbs().maxCoeff() <=
          1e-8 * scale * f.max_abs() * n);
  }
}

TEST_CASE("powers reject p <= 0") {
  const auto s = two_point(CFun{1.0, 2.0}, CFun{3.0, 4.0});
  CHECK_THROWS_AS(positive_power(s, 0.0, Side::star_t, CFun{1.0, 1.0}), ArgumentError);
  CHECK_THROWS_AS(positive_power(s, -1.0, Side::t_star, CFun{1.0, 1.0}), ArgumentError);
}

TEST_CASE("polar and Aluthge fixtures") {
  SUBCASE("E is its own modulus and isometry") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0});
    const auto parts = polar_parts(s);
    const auto e = ref_matrix(s);
    CHECK((form_matrix(parts.modulus, s) - e).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((form_matrix(parts.isometry, s) - e).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((form_matrix(aluthge_form(s), s) - e).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((form_matrix(positive_power_form(s, 1.0, Side::star_t), s) - e)
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }
  SUBCASE("nilpotent pair") {
    const auto s = two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0});
    const auto parts = polar_parts(s);
    const CFun f{{2.0, 1.0}, {-0.5, 3.0}};
    const cplx mean = (f[0] + f[1]) / 2.0;
    const auto uf = apply_form(parts.isometry, s.partition(), s.space(), f);
    CHECK(std::abs(uf[0] - mean) < 1e-15);
    CHECK(std::abs(uf[1] + mean) < 1e-15);
    const auto pf = apply_form(parts.modulus, s.partition(), s.space(), f);
    CHECK(std::abs(pf[0] - mean) < 1e-15);
    CHECK(std::abs(pf[1] - mean) < 1e-15);
    CHECK(aluthge_apply(s, f).max_abs() == 0.0);
  }
  SUBCASE("zero u gives zero factors") {
    const auto s = two_point(CFun{0.0, 0.0}, CFun{1.0, 2.0});
    const auto parts = polar_parts(s);
    CHECK(apply_form(parts.modulus, s.partition(), s.space(), CFun{1.0, 1.0}).max_abs() == 0.0);
    CHECK(apply_form(parts.isometry, s.partition(), s.space(), CFun{1.0, 1.0}).max_abs() == 0.0);
    CHECK(norm_formula(s) == 0.0);
  }
}

TEST_CASE("derived fields are a pure function of the inputs") {
  std::mt19937 g(5);
  const auto prob = ref::random_problem(g, 9, 3);
  const auto a = to_spec(prob);
  const auto b = to_spec(prob);
  CHECK(a.e_uw() == b.e_uw());
  CHECK(a.e_abs_u2() == b.e_abs_u2());
  CHECK(a.e_u() == b.e_u());
  CHECK(a == b);
}
