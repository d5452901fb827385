#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "condop/errors.hpp"
#include "condop/matrix_oracle.hpp"
#include "support.hpp"

using namespace condop;
using namespace condop::oracle;

namespace {

CondOpSpec two_point(CFun u, CFun w) {
  return CondOpSpec(MeasureSpace::uniform(2), Partition::single_block(2), std::move(u),
                    std::move(w));
}

std::vector<double> weights_of(const CondOpSpec& s) {
  return {s.space().weights().begin(), s.space().weights().end()};
}

}  // namespace

TEST_CASE("materialize fixtures") {
  const auto a = materialize(two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0}));
  CHECK(std::abs(a.entries()(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(a.entries()(1, 0) - 0.5) < 1e-15);
  CHECK(std::abs(a.entries()(0, 1)) < 1e-15);
  CHECK(std::abs(a.entries()(1, 1)) < 1e-15);

  const auto id = materialize(CondOpSpec(MeasureSpace::from_weights({1.0, 2.0, 3.0}),
                                         Partition::singletons(3), CFun::constant(3, 1.0),
                                         CFun::constant(3, 1.0)));
  CHECK((id.entries() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  const auto e = materialize(CondOpSpec(MeasureSpace::from_weights({1.0, 2.0, 3.0}),
                                        Partition::single_block(3), CFun::constant(3, 1.0),
                                        CFun::constant(3, 1.0)));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(std::abs(e.entries()(i, j) - (j + 1) / 6.0) < 1e-15);
  }
}

TEST_CASE("weighted adjoint") {
  std::mt19937 g(8);
  SUBCASE("uniform weights give the conjugate transpose") {
    Matrix m = Matrix::Random(4, 4);
    const DenseOperator a(m, std::vector<double>(4, 0.25));
    CHECK((weighted_adjoint(a).entries() - m.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("structural identity and involution") {
    for (int t = 0; t < 20; ++t) {
      const auto prob = ref::random_problem(g, 6, 2);
      const auto s = to_spec(prob);
      const auto a = materialize(s);
      const auto lhs = weighted_adjoint(a);
      const auto rhs = materialize(s.adjoint_form(), s.partition(), s.space());
      CHECK(relative_entry_error(lhs, rhs) < 1e-13);
      CHECK(relative_entry_error(weighted_adjoint(lhs), a) < 1e-13);
      const auto f = random_fun(g, 6), h = random_fun(g, 6);
      const cplx x = inner(a.apply(f), h, s.space());
      const cplx y = inner(f, lhs.apply(h), s.space());
      CHECK(std::abs(x - y) <= 1e-10 * norm(f, s.space()) * norm(h, s.space()));
      CHECK(max_diff(a.apply(f), apply(s, f)) <=
            1e-12 * std::max(apply(s, f).max_abs(), 1e-300) * 10);
      const auto refm = ref::condop_matrix(prob.mu, prob.label, prob.u, prob.w);
      CHECK((a.entries() - refm).cwiseAbs().maxCoeff() <= 1e-13 * refm.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("operator norm") {
  CHECK(op_norm(DenseOperator::identity({0.2, 0.3, 0.5})) == doctest::Approx(1.0));
  CHECK(op_norm(materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0}))) ==
        doctest::Approx(1.0));
  CHECK(op_norm(materialize(two_point(CFun{2.0, 0.0}, CFun{1.0, 1.0}))) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(op_norm(DenseOperator::zero({0.5, 0.5})) == 0.0);

  std::mt19937 g(17);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + static_cast<int>(g() % 20);
    const auto prob = ref::random_problem(g, n, 1 + static_cast<int>(g() % n));
    const auto a = ref::condop_matrix(prob.mu, prob.label, prob.u, prob.w);
    const double want = ref::norm(a, prob.mu);
    CHECK(std::abs(op_norm(DenseOperator(a, prob.mu)) - want) <= 1e-10 * want);
  }
  SUBCASE("non-convergence is reported") {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0 - 1e-9;
    m(2, 2) = 0.3;
    m(0, 1) = 1e-3;
    NormOptions o;
    o.max_iter = 2;
    o.tol = 1e-15;
    CHECK_THROWS_AS(op_norm(DenseOperator(m, {1.0, 1.0, 1.0}), o), NumericalError);
  }
}

TEST_CASE("herm_power") {
  const auto e = materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0}));
  for (const double p : {0.5, 1.0, 2.0, 3.7}) {
    CHECK(relative_entry_error(herm_power(e, p), e) < 1e-12);
  }
  CHECK_THROWS_AS(herm_power(materialize(two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0})), 0.5),
                  ContractViolation);
  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(herm_power(DenseOperator(neg, {1.0, 1.0}), 0.5), ContractViolation);

  std::mt19937 g(21);
  for (int t = 0; t < 30; ++t) {
    const auto prob = ref::random_problem(g, 7, 3);
    const auto s = to_spec(prob);
    const auto a = materialize(s);
    const auto tt = weighted_adjoint(a) * a;
    const auto lhs = herm_power(tt, 0.5) * herm_power(tt, 1.5);
    CHECK(relative_entry_error(lhs, herm_power(tt, 2.0)) <= 1e-8);
    CHECK(relative_entry_error(herm_power(tt, 1.0), tt) <= 1e-10);
    const auto refm = ref::psd_power(tt.entries(), prob.mu, 0.5);
    CHECK(relative_entry_error(herm_power(tt, 0.5), DenseOperator(refm, prob.mu)) <= 1e-8);
  }
}

TEST_CASE("polar factors") {
  const auto e = materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0}));
  const auto pf = polar_factors(e);
  CHECK(relative_entry_error(pf.isometry, e) < 1e-12);
  CHECK(relative_entry_error(pf.modulus, e) < 1e-12);

  const auto nil = two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0});
  const auto pn = polar_factors(materialize(nil));
  const auto parts = polar_parts(nil);
  CHECK(relative_entry_error(pn.modulus,
                             materialize(parts.modulus, nil.partition(), nil.space())) < 1e-12);
  CHECK(relative_entry_error(pn.isometry,
                             materialize(parts.isometry, nil.partition(), nil.space())) < 1e-12);

  std::mt19937 g(33);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + static_cast<int>(g() % 10);
    const auto s = to_spec(ref::random_problem(g, n, 1 + static_cast<int>(g() % n)));
    const auto a = materialize(s);
    const auto p = polar_factors(a);
    const double na = op_norm(a);
    CHECK(distance(p.isometry * p.modulus, a) <= 1e-9 * na);
    CHECK(distance(p.isometry * weighted_adjoint(p.isometry) * p.isometry, p.isometry) <= 1e-9);
    const auto cp = polar_parts(s);
    CHECK(relative_entry_error(p.modulus, materialize(cp.modulus, s.partition(), s.space())) <=
          1e-8);
    CHECK(relative_entry_error(p.isometry, materialize(cp.isometry, s.partition(), s.space())) <=
          1e-8);
  }
}

TEST_CASE("commuting family") {
  SUBCASE("normal operators pass") {
    const auto e = materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0}));
    CHECK(commuting_family_check(e, 4, 1e-10).passed);
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = cplx(2.0, 1.0);
    d(1, 1) = -3.0;
    d(2, 2) = cplx(0.0, 0.5);
    CHECK(commuting_family_check(DenseOperator(d, {1.0, 2.0, 3.0}), 4, 1e-12).passed);
  }
  SUBCASE("u = (1, 0), w = (1, 1) fails at depth 2") {
    const auto a = materialize(two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0}));
    const auto fc = commuting_family_check(a, 2, 1e-8);
    CHECK(!fc.passed);
    CHECK(fc.max_residual > 1e-3);
    CHECK(fc.max_residual ==
          doctest::Approx(ref::family_residual(a.entries(), a.mu(), 2)).epsilon(1e-9));
  }
  SUBCASE("nilpotent pair passes") {
    const auto a = materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, -1.0}));
    CHECK(commuting_family_check(a, 4, 1e-12).passed);
  }
  SUBCASE("zero operator passes") {
    CHECK(commuting_family_check(DenseOperator::zero({1.0, 1.0}), 4, 0.0).passed);
  }
  SUBCASE("agrees with the reference residual") {
    std::mt19937 g(44);
    for (int t = 0; t < 20; ++t) {
      const auto prob = ref::random_problem(g, 5, 2);
      const auto a = materialize(to_spec(prob));
      const double want = ref::family_residual(a.entries(), prob.mu, 3);
      CHECK(commuting_family_check(a, 3, 1e-8).max_residual ==
            doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("normality residual") {
  CHECK(normality_residual(DenseOperator::zero({1.0})) == 0.0);
  CHECK(normality_residual(DenseOperator::identity({1.0, 3.0})) < 1e-15);
  const auto a = materialize(two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0}));
  CHECK(normality_residual(a) ==
        doctest::Approx(ref::normal_residual(a.entries(), a.mu())).epsilon(1e-9));
}

TEST_CASE("eigensolve") {
  auto values = [](const std::vector<EigenCluster>& cs) {
    std::vector<cplx> v;
    for (const auto& c : cs) v.push_back(c.value);
    return v;
  };
  SUBCASE("averaging projection") {
    const auto cs = eigensolve(materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0})));
    REQUIRE(cs.size() == 2);
    CHECK(std::abs(cs[0].value) < 1e-12);
    CHECK(std::abs(cs[1].value - 1.0) < 1e-12);
  }
  SUBCASE("[[1/2, 0], [1/2, 0]]") {
    const auto cs = eigensolve(materialize(two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0})));
    REQUIRE(cs.size() == 2);
    CHECK(std::abs(cs[0].value) < 1e-12);
    CHECK(std::abs(cs[1].value - 0.5) < 1e-12);
  }
  SUBCASE("diagonal matrix with a repeated value") {
    Matrix d = Matrix::Zero(4, 4);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    d(2, 2) = 2.0;
    d(3, 3) = cplx(0.0, 1.0);
    const auto cs = eigensolve(DenseOperator(d, {1.0, 2.0, 3.0, 4.0}));
    REQUIRE(cs.size() == 3);
    CHECK(std::abs(cs[0].value + 1.0) < 1e-12);
    CHECK(std::abs(cs[1].value - cplx(0.0, 1.0)) < 1e-12);
    CHECK(std::abs(cs[2].value - 2.0) < 1e-12);
    CHECK(cs[2].multiplicity == 2);
    CHECK(cs[2].basis.cols() == 2);
  }
  SUBCASE("random operators") {
    std::mt19937 g(55);
    for (int t = 0; t < 30; ++t) {
      const int n = 2 + static_cast<int>(g() % 12);
      const auto prob = ref::random_problem(g, n, 1 + static_cast<int>(g() % n));
      const auto a = materialize(to_spec(prob));
      const auto cs = eigensolve(a);
      int total = 0;
      for (const auto& c : cs) {
        total += c.multiplicity;
        CHECK(c.residual <= 1e-8);
      }
      CHECK(total == n);
      const double na = op_norm(a);
      for (const auto& lam : ref::eigenvalues(a.entries())) {
        const auto vs = values(cs);
        const double d = std::abs(
            *std::min_element(vs.begin(), vs.end(), [&](cplx x, cplx y) {
              return std::abs(x - lam) < std::abs(y - lam);
            }) - lam);
        CHECK(d <= 1e-7 * std::max(na, 1.0));
      }
    }
  }
}

TEST_CASE("joint residual") {
  const auto a = materialize(two_point(CFun{1.0, 0.0}, CFun{1.0, 1.0}));
  const auto cs = eigensolve(a);
  REQUIRE(cs.size() == 2);
  CHECK(joint_residual(a, cs[1]) > 1e-3);
  const auto e = materialize(two_point(CFun{1.0, 1.0}, CFun{1.0, 1.0}));
  for (const auto& c : eigensolve(e)) CHECK(joint_residual(e, c) < 1e-10);
}
