#include "condop/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "condop/classify.hpp"
#include "condop/examples_gen.hpp"
#include "condop/instance_io.hpp"
#include "condop/matrix_oracle.hpp"

namespace condop {

using nlohmann::json;
namespace or_ = oracle;

const char* to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::info: return "info";
  }
  return "?";
}

bool CaseReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == CheckStatus::fail; });
}

bool SuiteReport::passed() const {
  return std::all_of(cases.begin(), cases.end(),
                     [](const CaseReport& c) { return c.passed(); });
}

namespace {

void bound(CaseReport& r, std::string name, double residual, double tol,
           std::string detail = {}) {
  r.checks.push_back({std::move(name),
                      residual <= tol ? CheckStatus::pass : CheckStatus::fail,
                      residual, tol, std::move(detail)});
}

void info(CaseReport& r, std::string name, double residual, std::string detail) {
  r.checks.push_back({std::move(name), CheckStatus::info, residual, 0.0,
                      std::move(detail)});
}

void agreement(CaseReport& r, std::string name, bool agree, double residual,
               double tol, std::string detail) {
  r.checks.push_back({std::move(name), agree ? CheckStatus::pass : CheckStatus::fail,
                      residual, tol, std::move(detail)});
}

/// Three-way normality reading of a commutator residual.
enum class Band { normal, not_normal, undecided };

Band band_of(double residual, const VerifyOptions& o) {
  if (residual <= o.normal_lo) return Band::normal;
  if (residual > o.normal_hi) return Band::not_normal;
  return Band::undecided;
}

const char* band_name(Band b) {
  switch (b) {
    case Band::normal: return "normal";
    case Band::not_normal: return "not normal";
    case Band::undecided: return "in hysteresis band";
  }
  return "?";
}

void normal_agreement(CaseReport& r, std::string name, const CriterionVerdict& v,
                      double residual, const VerifyOptions& o) {
  const Band b = band_of(residual, o);
  std::string detail = std::string("closed form ") + to_string(v.status) + " (" +
                       v.criterion_id + "), oracle " + band_name(b);
  if (v.status == Status::indeterminate || b == Band::undecided) {
    info(r, std::move(name), residual, std::move(detail));
    return;
  }
  const bool agree = (v.status == Status::yes) == (b == Band::normal);
  agreement(r, std::move(name), agree, residual, o.normal_lo, std::move(detail));
}

std::string p_label(double p) {
  if (p == 0.5) return "0.5";
  return std::to_string(static_cast<int>(p));
}

}  // namespace

CaseReport verify_spec(const CondOpSpec& spec, const VerifyOptions& o,
                       std::string label) {
  CaseReport r;
  r.label = std::move(label);
  r.digest = digest(Instance::of(spec));
  const auto& part = spec.partition();
  const auto& space = spec.space();
  const auto t = or_::materialize(spec);
  const auto t_star = or_::weighted_adjoint(t);

  const double oracle_norm = or_::op_norm(t);
  const double formula_norm = norm_formula(spec);
  bound(r, "norm_identity",
        oracle_norm > 0.0 ? std::abs(formula_norm - oracle_norm) / oracle_norm
                          : formula_norm,
        o.tol);

  const auto tt = t_star * t;
  const auto ttstar = t * t_star;
  for (const double p : {0.5, 1.0, 2.0, 3.0}) {
    for (const Side side : {Side::star_t, Side::t_star}) {
      const auto closed =
          or_::materialize(positive_power_form(spec, p, side, o.supp_tol), part, space);
      const auto ref = or_::herm_power(side == Side::star_t ? tt : ttstar, p);
      bound(r,
            std::string(side == Side::star_t ? "power_star_t_p" : "power_t_star_p") +
                p_label(p),
            or_::relative_entry_error(closed, ref), o.tol);
    }
  }

  const auto parts = polar_parts(spec, o.supp_tol);
  const auto modulus = or_::materialize(parts.modulus, part, space);
  const auto isometry = or_::materialize(parts.isometry, part, space);
  const double scale = oracle_norm > 0.0 ? oracle_norm : 1.0;
  bound(r, "polar_reconstruction", or_::distance(isometry * modulus, t) / scale,
        o.recon_tol);
  bound(r, "partial_isometry",
        or_::distance(isometry * or_::weighted_adjoint(isometry) * isometry, isometry),
        o.recon_tol);
  const auto pf = or_::polar_factors(t);
  bound(r, "polar_modulus", or_::relative_entry_error(modulus, pf.modulus), o.tol);
  bound(r, "polar_isometry", or_::relative_entry_error(isometry, pf.isometry), o.tol);

  const auto root = or_::herm_power(pf.modulus, 0.5);
  const auto aluthge_ref = root * pf.isometry * root;
  const auto aluthge = or_::materialize(aluthge_form(spec, o.supp_tol), part, space);
  bound(r, "aluthge", or_::distance(aluthge, aluthge_ref) / scale, o.tol);

  const auto cv = centered_closed_form(spec, o.tau, o.supp_tol);
  const auto co = centered_oracle(spec, o.depth, o.tol);
  {
    std::string detail = std::string("closed form ") + to_string(cv.status) + " (" +
                         cv.criterion_id + "), oracle " +
                         (co.holds ? "centered" : "not centered");
    if (cv.status == Status::indeterminate) {
      info(r, "centered_soundness", co.residual, std::move(detail));
    } else {
      agreement(r, "centered_soundness", (cv.status == Status::yes) == co.holds,
                co.residual, o.tol, std::move(detail));
    }
  }

  normal_agreement(r, "normal_agreement", normal_closed_form(spec, o.tau, o.supp_tol),
                   or_::normality_residual(t), o);

  SpectrumOptions so;
  so.supp_tol = o.supp_tol;
  so.tau = o.tau;
  const auto sp = joint_spectrum_check(spec, so);
  bound(r, "spectrum_identity", sp.sets_match ? 0.0 : sp.set_distance,
        so.cluster_tol,
        std::to_string(sp.nonzero_level_values.size()) + " level values, " +
            std::to_string(sp.nonzero_eigenvalues.size()) + " nonzero eigenvalues");
  int non_joint = 0;
  double worst_joint = 0.0;
  for (const auto& e : sp.eigenvalues) {
    if (!e.joint) ++non_joint;
    worst_joint = std::max(worst_joint, e.joint_residual);
  }
  const std::string jd = std::to_string(non_joint) + " of " +
                         std::to_string(sp.eigenvalues.size()) +
                         " eigenvalues not joint";
  if (sp.equality_case) {
    bound(r, "joint_spectrum", worst_joint, so.joint_tol, jd);
  } else {
    info(r, "joint_spectrum", worst_joint, jd + " (equality hypothesis absent)");
  }
  return r;
}

CaseReport verify_kernel(const KernelSpec& raw, const VerifyOptions& o,
                         std::string label) {
  CaseReport r;
  r.label = std::move(label);
  r.digest = digest(Instance::of(raw));
  const auto ks = normalize_to_probability(raw);
  const auto n = ks.size();
  const LazyLift lift(ks);

  double kmax = 0.0;
  for (const auto& z : ks.kernel()) kmax = std::max(kmax, std::abs(z));
  double round_trip = 0.0;
  std::mt19937_64 rng(0x6a09e667f3bcc908ULL);
  std::normal_distribution<double> nd;
  for (std::size_t j = 0; j <= n; ++j) {
    CFun f = CFun::zeros(n);
    if (j < n) {
      f[j] = 1.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) f[i] = cplx(nd(rng), nd(rng));
    }
    const CFun direct = kernel_apply(raw, f);
    const CFun lifted = lift.apply(lift.embed(f));
    const double scale = std::max(kmax * f.max_abs(), 1e-300);
    for (std::size_t y = 0; y < n; ++y) {
      round_trip = std::max(round_trip,
                            (lift.restrict_to(lifted, y) - direct).max_abs() / scale);
    }
  }
  bound(r, "lift_round_trip", round_trip, o.lift_tol);

  const auto br = kernel_bounded_report(ks);
  const bool dense = n * n <= kMaxExplicitLift;
  if (dense) {
    const double lifted = or_::op_norm(lifted_matrix(ks));
    bound(r, "lifted_norm",
          lifted > 0.0 ? std::abs(br.lifted_norm - lifted) / lifted : br.lifted_norm,
          o.tol);
  }
  const double l2x_norm = or_::op_norm(kernel_matrix(ks));
  bound(r, "kernel_norm_bound",
        std::max(0.0, l2x_norm - br.lifted_norm) / std::max(br.lifted_norm, 1e-300),
        o.tol, "operator norm on L^2(X) against sqrt(ess sup s)");

  normal_agreement(r, "kernel_normal", kernel_normal(ks, o.tau, o.supp_tol),
                   lifted_normality_residual(ks), o);

  const auto kc = kernel_centered(ks, o.tau, o.supp_tol);
  if (dense) {
    const auto co = centered_oracle(lift_to_condop(ks), o.depth, o.tol);
    std::string detail = std::string("closed form ") + to_string(kc.status) + " (" +
                         kc.criterion_id + "), lifted oracle " +
                         (co.holds ? "centered" : "not centered");
    if (kc.status == Status::indeterminate) {
      info(r, "kernel_centered", co.residual, std::move(detail));
    } else {
      agreement(r, "kernel_centered", (kc.status == Status::yes) == co.holds,
                co.residual, o.tol, std::move(detail));
    }
  } else {
    info(r, "kernel_centered", kc.residual,
         std::string("closed form ") + to_string(kc.status) + ", lift too large for the dense oracle");
  }

  info(r, "l2x_normality_residual", or_::normality_residual(kernel_matrix(ks)),
       "kernel matrix on L^2(X), not the lift");
  return r;
}

SuiteReport verify_suite(const VerifyOptions& o) {
  static constexpr const char* kFamilies[] = {"random", "equality_case", "null_product",
                                              "degenerate", "mean_free"};
  SuiteReport s;
  for (int t = 0; t < o.trials; ++t) {
    const std::uint64_t seed = derive_seed(o.seed, static_cast<std::uint64_t>(t));
    std::mt19937_64 shape(seed ^ 0x5bd1e995ULL);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 10)(shape);
    const std::size_t nb = std::uniform_int_distribution<std::size_t>(1, n)(shape);
    const int family = t % 5;
    const CondOpSpec spec = [&] {
      switch (family) {
        case 0: return gen_random(seed, n, nb);
        case 1: return gen_equality_case(seed, n, nb);
        case 2: return gen_null_product(seed, n, nb);
        case 3: return gen_degenerate(seed, n, nb);
        default: return gen_mean_free(seed, n, nb);
      }
    }();
    s.cases.push_back(verify_spec(spec, o, std::string(kFamilies[family]) + "#" +
                                               std::to_string(t)));
  }
  const std::vector<double> grid = {0.25, 0.5, 0.75, 1.0};
  s.cases.push_back(verify_spec(gen_example_213(grid), o, "symmetric_pairs"));
  s.cases.push_back(verify_spec(
      CondOpSpec(MeasureSpace::uniform(2), Partition::single_block(2), CFun{1.0, 0.0},
                 CFun{1.0, 1.0}),
      o, "unit_weight_pair"));
  const std::uint64_t kseed = derive_seed(o.seed, 1u << 20);
  s.cases.push_back(verify_kernel(gen_random_kernel(kseed, 4), o, "kernel_random#0"));
  s.cases.push_back(
      verify_kernel(gen_random_kernel(kseed + 1, 7), o, "kernel_random#1"));
  s.cases.push_back(
      verify_kernel(gen_random_kernel(kseed + 2, 5, true), o, "kernel_row_constant"));
  return s;
}

json to_json(const Check& c) {
  json j{{"name", c.name},
         {"status", to_string(c.status)},
         {"residual", c.residual},
         {"tolerance", c.tolerance}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

json to_json(const CaseReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return json{{"label", r.label},
              {"digest", r.digest},
              {"passed", r.passed()},
              {"checks", std::move(checks)}};
}

json to_json(const SuiteReport& r, const VerifyOptions& o) {
  json cases = json::array();
  int failed = 0;
  for (const auto& c : r.cases) {
    cases.push_back(to_json(c));
    if (!c.passed()) ++failed;
  }
  return json{{"command", "verify"},
              {"seed", o.seed},
              {"tolerances",
               {{"tol", o.tol},
                {"recon_tol", o.recon_tol},
                {"tau", o.tau},
                {"supp_tol", o.supp_tol},
                {"depth", o.depth},
                {"normal_band", {o.normal_lo, o.normal_hi}},
                {"lift_tol", o.lift_tol}}},
              {"cases", std::move(cases)},
              {"failed_cases", failed},
              {"passed", r.passed()}};
}

}  // namespace condop
