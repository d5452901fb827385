#include "condop/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "condop/classify.hpp"
#include "condop/errors.hpp"
#include "condop/examples_gen.hpp"
#include "condop/instance_io.hpp"
#include "condop/kernel_ops.hpp"
#include "condop/matrix_oracle.hpp"
#include "condop/verify.hpp"

namespace condop::cli {

using nlohmann::json;

namespace {

struct Flags {
  std::string instance;
  double tol = 1e-8;
  double tau = 1e-9;
  double supp_tol = kDefaultSuppTol;
  int depth = 4;
  std::uint64_t seed = 0;
  int trials = -1;
  std::string out_path;
  std::string format = "text";
  bool timings = false;

  // gen
  std::string kind = "random";
  std::size_t n_points = 8;
  std::size_t n_blocks = 3;
  double magnitude = 1.0;
  std::size_t resolution = 16;
  std::vector<double> grid;
  bool as_recipe = false;
  bool audit = false;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string num(cplx z) {
  char buf[64];
  if (z.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.10g", z.real());
  } else {
    std::snprintf(buf, sizeof buf, "%.10g%+.10gi", z.real(), z.imag());
  }
  return buf;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

std::vector<std::string> ids_of(const MeasureSpace& m, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (const auto i : idx) out.push_back(m.id(i));
  return out;
}

std::string join_ids(const std::vector<std::string>& ids, std::size_t cap = 8) {
  std::string s;
  for (std::size_t i = 0; i < ids.size() && i < cap; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > cap) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

const char* cap_status(Status s) {
  switch (s) {
    case Status::yes: return "Yes";
    case Status::no: return "No";
    case Status::indeterminate: return "Indeterminate";
  }
  return "?";
}

json verdict_json(const CriterionVerdict& v, const MeasureSpace& m) {
  return json{{"status", to_string(v.status)},
              {"criterion", v.criterion_id},
              {"residual", v.residual},
              {"witness", ids_of(m, v.witness)}};
}

std::string verdict_text(const CriterionVerdict& v, const MeasureSpace& m) {
  std::string s = std::string(cap_status(v.status)) + " [" + v.criterion_id +
                  ", residual " + sci(v.residual) + "]";
  if (!v.witness.empty()) s += " witness: " + join_ids(ids_of(m, v.witness));
  return s;
}

json form_json(const MultiplierForm& f) {
  json outer = json::array(), inner = json::array();
  for (const auto& z : f.outer) outer.push_back(cjson(z));
  for (const auto& z : f.inner) inner.push_back(cjson(z));
  return json{{"outer", outer}, {"inner", inner}};
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Command output: a human summary plus the structured report.
struct Result {
  int code = kOk;
  std::string text;
  json report = json::object();
};

json tolerances(const Flags& f) {
  return json{{"tol", f.tol}, {"tau", f.tau}, {"supp_tol", f.supp_tol}, {"depth", f.depth}};
}

Instance need_instance(const Flags& f) {
  if (f.instance.empty()) throw InputError("an instance file is required");
  return load_instance(f.instance);
}

Result cmd_check(const Flags& f) {
  const auto inst = need_instance(f);
  const auto spec = resolve(inst);
  const auto& m = spec.space();
  Timer timer;
  Result r;
  const auto cc = centered_closed_form(spec, f.tau, f.supp_tol);
  const auto co = centered_oracle(spec, f.depth, f.tol);
  const auto nc = normal_closed_form(spec, f.tau, f.supp_tol);
  const double nres = oracle::normality_residual(oracle::materialize(spec));
  const bool n_holds = nres <= f.tol;

  bool consistent = true;
  if (cc.status != Status::indeterminate) consistent &= (cc.status == Status::yes) == co.holds;
  if (nc.status != Status::indeterminate) consistent &= (nc.status == Status::yes) == n_holds;

  r.report["command"] = "check";
  r.report["digest"] = digest(inst);
  r.report["tolerances"] = tolerances(f);
  r.report["centered"] = {{"closed_form", verdict_json(cc, m)},
                          {"oracle", {{"holds", co.holds}, {"residual", co.residual}}}};
  r.report["normal"] = {{"closed_form", verdict_json(nc, m)},
                        {"oracle", {{"holds", n_holds}, {"residual", nres}}}};
  r.text += "centered: " + verdict_text(cc, m) + "\n";
  r.text += "  oracle: " + std::string(co.holds ? "centered" : "not centered") +
            " (family residual " + sci(co.residual) + ")\n";

  const bool unit_w = std::all_of(spec.w().begin(), spec.w().end(),
                                  [](cplx z) { return std::abs(z - 1.0) <= 1e-12; });
  if (unit_w) {
    const auto ev = centered_eu_special(spec, f.tau, f.supp_tol);
    r.report["centered"]["unit_weight_form"] = verdict_json(ev, m);
    r.text += "  w = 1 form: " + verdict_text(ev, m) + "\n";
    if (ev.status != Status::indeterminate) {
      consistent &= (ev.status == Status::yes) == co.holds;
    }
  }
  r.text += "normal: " + verdict_text(nc, m) + "\n";
  r.text += "  oracle: " + std::string(n_holds ? "normal" : "not normal") +
            " (commutator residual " + sci(nres) + ")\n";
  r.report["consistent"] = consistent;
  if (f.timings) r.report["timings_ms"] = {{"total", timer.ms()}};
  r.text += consistent ? "closed forms agree with the oracle\n"
                       : "VIOLATION: a decisive closed-form verdict disagrees with the oracle\n";
  r.code = consistent ? kOk : kViolation;
  return r;
}

Result from_case(const std::string& command, const Instance& inst, const CaseReport& c,
                 const std::vector<std::string>& names, const Flags& f) {
  Result r;
  r.report["command"] = command;
  r.report["digest"] = digest(inst);
  r.report["tolerances"] = tolerances(f);
  json checks = json::array();
  bool ok = true;
  for (const auto& ch : c.checks) {
    if (!names.empty() && std::find(names.begin(), names.end(), ch.name) == names.end()) {
      continue;
    }
    checks.push_back(to_json(ch));
    ok &= ch.status != CheckStatus::fail;
    r.text += ch.name + ": " + to_string(ch.status) + " (residual " + sci(ch.residual);
    if (ch.status != CheckStatus::info) r.text += ", tolerance " + sci(ch.tolerance);
    r.text += ")";
    if (!ch.detail.empty()) r.text += " " + ch.detail;
    r.text += "\n";
  }
  r.report["checks"] = std::move(checks);
  r.report["passed"] = ok;
  r.code = ok ? kOk : kViolation;
  return r;
}

VerifyOptions verify_options(const Flags& f) {
  VerifyOptions o;
  o.tol = f.tol;
  o.tau = f.tau;
  o.supp_tol = f.supp_tol;
  o.depth = f.depth;
  o.seed = f.seed;
  if (f.trials >= 0) o.trials = f.trials;
  return o;
}

Result cmd_polar(const Flags& f) {
  const auto inst = need_instance(f);
  const auto spec = resolve(inst);
  auto r = from_case("polar", inst, verify_spec(spec, verify_options(f)),
                     {"polar_reconstruction", "partial_isometry", "polar_modulus",
                      "polar_isometry"},
                     f);
  const auto parts = polar_parts(spec, f.supp_tol);
  r.report["modulus"] = form_json(parts.modulus);
  r.report["isometry"] = form_json(parts.isometry);
  return r;
}

Result cmd_aluthge(const Flags& f) {
  const auto inst = need_instance(f);
  const auto spec = resolve(inst);
  auto r = from_case("aluthge", inst, verify_spec(spec, verify_options(f)), {"aluthge"}, f);
  r.report["aluthge"] = form_json(aluthge_form(spec, f.supp_tol));
  return r;
}

Result cmd_spectrum(const Flags& f) {
  const auto inst = need_instance(f);
  const auto spec = resolve(inst);
  SpectrumOptions so;
  so.supp_tol = f.supp_tol;
  so.tau = f.tau;
  const auto sp = joint_spectrum_check(spec, so);
  Result r;
  r.report["command"] = "spectrum";
  r.report["digest"] = digest(inst);
  r.report["tolerances"] = {{"tau", so.tau},           {"supp_tol", so.supp_tol},
                            {"zero_tol", so.zero_tol}, {"cluster_tol", so.cluster_tol},
                            {"joint_tol", so.joint_tol}};
  json eig = json::array();
  bool all_joint = true;
  r.text += "eigenvalues:\n";
  for (const auto& e : sp.eigenvalues) {
    eig.push_back({{"value", cjson(e.value)},
                   {"multiplicity", e.multiplicity},
                   {"joint", e.joint},
                   {"joint_residual", e.joint_residual}});
    all_joint &= e.joint;
    r.text += "  " + num(e.value) + " x" + std::to_string(e.multiplicity) +
              "  joint: " + (e.joint ? "true" : "false") + " (residual " +
              sci(e.joint_residual) + ")\n";
  }
  json levels = json::array(), nonzero = json::array();
  std::string lv, nz;
  for (const auto& z : sp.nonzero_level_values) {
    levels.push_back(cjson(z));
    lv += (lv.empty() ? "" : ", ") + num(z);
  }
  for (const auto& z : sp.nonzero_eigenvalues) {
    nonzero.push_back(cjson(z));
    nz += (nz.empty() ? "" : ", ") + num(z);
  }
  r.report["eigenvalues"] = std::move(eig);
  r.report["nonzero_level_values"] = std::move(levels);
  r.report["nonzero_spectrum"] = std::move(nonzero);
  r.report["sets_match"] = sp.sets_match;
  r.report["set_distance"] = sp.set_distance;
  r.report["equality_case"] = sp.equality_case;
  r.text += "nonzero spectrum: {" + nz + "}\n";
  r.text += "values of E(uw): {" + lv + "} " +
            (sp.sets_match ? "match" : "DO NOT match") + " (distance " +
            sci(sp.set_distance) + ")\n";
  r.text += "equality |E(uw)|^2 = E|u|^2 E|w|^2: " +
            std::string(sp.equality_case ? "holds" : "fails") + "\n";
  const bool ok = sp.sets_match && (!sp.equality_case || all_joint);
  if (sp.equality_case && !all_joint) {
    r.text += "VIOLATION: equality case with a non-joint eigenvalue\n";
  }
  r.report["passed"] = ok;
  r.code = ok ? kOk : kViolation;
  return r;
}

Result cmd_kernel(const Flags& f) {
  const auto inst = need_instance(f);
  if (!inst.kernel) throw InputError("the kernel command needs an instance with a kernel");
  const auto& raw = *inst.kernel;
  auto r = from_case("kernel", inst, verify_kernel(raw, verify_options(f)), {}, f);
  const auto ks = normalize_to_probability(raw);
  const auto br = kernel_bounded_report(ks);
  const auto kc = kernel_centered(ks, f.tau, f.supp_tol);
  const auto kn = kernel_normal(ks, f.tau, f.supp_tol);
  r.report["bound"] = {{"row_square_integrals", br.row_square_integrals},
                       {"all_rows_finite", br.all_rows_finite},
                       {"ess_sup", br.row_sup},
                       {"lifted_norm", br.lifted_norm}};
  r.report["centered"] = verdict_json(kc, ks.base());
  r.report["normal"] = verdict_json(kn, ks.base());
  r.text = "bounded: " + std::string(br.all_rows_finite ? "yes" : "no") +
           " (ess sup of row integrals " + sci(br.row_sup) + ", lifted norm " +
           sci(br.lifted_norm) + ")\n" + "centered: " + verdict_text(kc, ks.base()) +
           "\n" + "normal: " + verdict_text(kn, ks.base()) + "\n" + r.text;
  return r;
}

Result cmd_gen(const Flags& f) {
  InstanceRecipe rec;
  rec.kind = recipe_kind_from_string(f.kind);
  rec.seed = f.seed;
  rec.n_points = f.n_points;
  rec.n_blocks = f.n_blocks;
  rec.magnitude = f.magnitude;
  rec.resolution = f.resolution;
  rec.grid = f.grid;
  if (rec.kind == RecipeKind::example213 && rec.grid.empty()) rec.grid = {0.25, 0.5, 0.75, 1.0};
  Result r;
  if (f.audit) {
    if (rec.kind != RecipeKind::example212) throw ArgumentError("--audit applies to example212");
    const auto ex = gen_example_212(rec.resolution);
    const auto& a = ex.audit;
    json cols = json::array();
    for (std::size_t i = 0; i < a.x.size(); ++i) {
      cols.push_back({{"x", a.x[i]},
                      {"e_abs_u2", a.e_abs_u2[i]},
                      {"e_abs_w2", a.e_abs_w2[i]},
                      {"product", a.product[i]},
                      {"e_uw_sq", a.e_uw_sq[i]},
                      {"closed_e_uw_sq", a.closed_e_uw_sq[i]},
                      {"gap", a.gap[i]}});
    }
    r.report = {{"command", "gen"},
                {"audit", "example212"},
                {"resolution", rec.resolution},
                {"columns", std::move(cols)},
                {"max_product_error", a.max_product_error},
                {"max_e_uw_sq_error", a.max_e_uw_sq_error},
                {"min_gap", a.min_gap},
                {"equality_holds", a.equality_holds}};
    r.text = "strip example audit at n = " + std::to_string(rec.resolution) +
             ":\n  max |E|u|^2 E|w|^2 - 2| = " + sci(a.max_product_error) +
             "\n  max ||E(uw)|^2 - 64(4+x)/(x+12)^2| = " + sci(a.max_e_uw_sq_error) +
             "\n  gap at x = " + num(a.x.front()) + ": " + num(a.gap.front()) +
             "\n  claimed equality E|u|^2 E|w|^2 = |E(uw)|^2: " +
             (a.equality_holds ? "reproduced" : "NOT reproduced") + "\n";
    return r;
  }
  const auto inst = f.as_recipe ? Instance::of(rec) : Instance::of(realize(rec));
  r.report = to_json(inst);
  r.text = serialize(inst);
  return r;
}

Result cmd_verify(const Flags& f) {
  const auto opts = verify_options(f);
  if (!f.instance.empty()) {
    const auto inst = load_instance(f.instance);
    const auto c = inst.kernel ? verify_kernel(*inst.kernel, opts)
                               : verify_spec(resolve(inst), opts);
    return from_case("verify", inst, c, {}, f);
  }
  Timer timer;
  const auto suite = verify_suite(opts);
  Result r;
  r.report = to_json(suite, opts);
  if (f.timings) r.report["timings_ms"] = {{"total", timer.ms()}};
  for (const auto& c : suite.cases) {
    int pass = 0, fail = 0, inf = 0;
    for (const auto& ch : c.checks) {
      if (ch.status == CheckStatus::pass) ++pass;
      if (ch.status == CheckStatus::fail) ++fail;
      if (ch.status == CheckStatus::info) ++inf;
    }
    r.text += (c.passed() ? "PASS " : "FAIL ") + c.label + ": " + std::to_string(pass) +
              " pass, " + std::to_string(fail) + " fail, " + std::to_string(inf) +
              " info\n";
    for (const auto& ch : c.checks) {
      if (ch.status == CheckStatus::fail) {
        r.text += "  " + ch.name + " residual " + sci(ch.residual) + " > " +
                  sci(ch.tolerance) + "\n";
      }
    }
  }
  r.code = suite.passed() ? kOk : kViolation;
  return r;
}

Result cmd_search(const Flags& f) {
  SearchOptions o;
  o.trials = f.trials >= 0 ? f.trials : 1000;
  o.depth = f.depth;
  o.tol = f.tol;
  o.seed = f.seed;
  o.tau = f.tau;
  o.supp_tol = f.supp_tol;
  const auto rep = counterexample_search(o);
  auto findings = [](const std::vector<SearchFinding>& v) {
    json a = json::array();
    for (const auto& x : v) {
      a.push_back({{"trial", x.trial},
                   {"seed", x.seed},
                   {"family", x.family},
                   {"oracle_residual", x.oracle_residual},
                   {"criterion_residual", x.criterion_residual}});
    }
    return a;
  };
  Result r;
  r.report = {{"command", "search"},
              {"seed", o.seed},
              {"tolerances", tolerances(f)},
              {"trials", rep.trials},
              {"verdicts", {{"yes", rep.yes}, {"no", rep.no}, {"indeterminate", rep.indeterminate}}},
              {"violations", findings(rep.violations)},
              {"sufficient_failures", findings(rep.sufficient_failures)},
              {"indeterminate_centered", rep.indeterminate_centered},
              {"indeterminate_not_centered", rep.indeterminate_not_centered},
              {"fails_on_support", rep.fails_on_support},
              {"fails_off_support_only", rep.fails_off_support_only},
              {"skipped_nonconvergence", rep.skipped_nonconvergence},
              {"gap_examples", findings(rep.gap_examples)}};
  r.text = std::to_string(rep.trials) + " trials: " + std::to_string(rep.yes) + " yes, " +
           std::to_string(rep.no) + " no, " + std::to_string(rep.indeterminate) +
           " indeterminate\n" + "violations on the necessary support: " +
           std::to_string(rep.violations.size()) + "\n" +
           "equality-case specs rejected by the oracle: " +
           std::to_string(rep.sufficient_failures.size()) + "\n" +
           "indeterminate but centered: " + std::to_string(rep.indeterminate_centered) +
           ", indeterminate and not centered: " +
           std::to_string(rep.indeterminate_not_centered) + "\n" +
           "skipped (non-convergence): " + std::to_string(rep.skipped_nonconvergence) + "\n";
  const bool ok = rep.violations.empty() && rep.sufficient_failures.empty();
  r.code = ok ? kOk : kViolation;
  return r;
}

void add_common(CLI::App* sub, Flags& f, bool instance_required) {
  auto* opt = sub->add_option("instance", f.instance, "Instance file (JSON)");
  if (instance_required) opt->required();
  sub->add_option("--tol", f.tol, "Oracle tolerance")->capture_default_str();
  sub->add_option("--tau", f.tau, "Relative tolerance of closed-form identities")
      ->capture_default_str();
  sub->add_option("--supp-tol", f.supp_tol, "Relative support threshold")
      ->capture_default_str();
  sub->add_option("--depth", f.depth, "Commuting-family depth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  sub->add_option("--trials", f.trials, "Trial count")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", f.out_path, "Write the structured report to this file");
  sub->add_option("--format", f.format, "Standard output format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();
  sub->add_flag("--timings", f.timings, "Include wall-clock timings in the report");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Weighted conditional expectation operators on finite measure spaces",
               "condop"};
  app.require_subcommand(1);
  std::map<std::string, std::function<Result(const Flags&)>> handlers;
  auto add = [&](const char* name, const char* help, bool needs_instance,
                 std::function<Result(const Flags&)> h) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, f, needs_instance);
    handlers[name] = std::move(h);
    return sub;
  };
  add("check", "Centered and normal verdicts, closed form and oracle", true, cmd_check);
  add("polar", "Polar decomposition against the SVD oracle", true, cmd_polar);
  add("aluthge", "Aluthge transform against the oracle", true, cmd_aluthge);
  add("spectrum", "Point spectrum and joint flags", true, cmd_spectrum);
  add("kernel", "Kernel operator checks through the lift", true, cmd_kernel);
  add("verify", "Regression suite (seeded, or on one instance)", false, cmd_verify);
  add("search", "Randomized counterexample search", false, cmd_search);
  auto* gen = add("gen", "Generate an instance", false, cmd_gen);
  gen->add_option("--kind", f.kind, "example212|example213|random|equality_case|"
                                    "null_product|degenerate|mean_free")
      ->capture_default_str();
  gen->add_option("--n-points", f.n_points)->capture_default_str();
  gen->add_option("--n-blocks", f.n_blocks)->capture_default_str();
  gen->add_option("--magnitude", f.magnitude)->capture_default_str();
  gen->add_option("--resolution", f.resolution)->capture_default_str();
  gen->add_option("--grid", f.grid, "Abscissae for example213");
  gen->add_flag("--recipe", f.as_recipe, "Emit the recipe instead of the realized operator");
  gen->add_flag("--audit", f.audit, "Emit the example212 quadrature audit");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Result r = handlers.at(command)(f);
    const std::string structured = r.report.dump(2) + "\n";
    if (!f.out_path.empty()) {
      std::ofstream file(f.out_path, std::ios::binary);
      if (!file) throw InputError(f.out_path + ": cannot write report");
      file << (command == "gen" && !f.audit ? r.text : structured);
    }
    if (f.format == "structured") {
      out << (command == "gen" && !f.audit ? r.text : structured);
    } else {
      out << r.text;
    }
    return r.code;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << " (after " << e.iterations()
        << " iterations)\n";
    return kNonConvergence;
  } catch (const ContractViolation& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNonConvergence;
  }
}

}  // namespace condop::cli
