#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "condop/condop_core.hpp"
#include "condop/kernel_ops.hpp"

namespace condop {

enum class CheckStatus { pass, fail, info };

const char* to_string(CheckStatus s) noexcept;

/// One closed-form-vs-oracle assertion.
struct Check {
  std::string name;
  CheckStatus status = CheckStatus::info;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct CaseReport {
  std::string label;
  std::string digest;
  std::vector<Check> checks;
  bool passed() const;
};

struct VerifyOptions {
  /// Closed form vs oracle, relative.
  double tol = 1e-8;
  /// Polar reconstruction and partial-isometry identities, relative to ||T||.
  double recon_tol = 1e-9;
  double tau = 1e-9;
  double supp_tol = kDefaultSuppTol;
  int depth = 4;
  /// Normality hysteresis: residual <= normal_lo is normal, > normal_hi is
  /// not, anything between is reported without a verdict.
  double normal_lo = 1e-8;
  double normal_hi = 1e-6;
  double lift_tol = 1e-12;
  std::uint64_t seed = 0;
  /// Number of random operator cases in the seeded suite.
  int trials = 12;
};

/// Norm identity, positive powers (p = 1/2, 1, 2, 3, both sides), polar
/// reconstruction and factors, Aluthge agreement, centered soundness,
/// normality, spectrum identity and joint flags.
CaseReport verify_spec(const CondOpSpec& spec, const VerifyOptions& opts,
                       std::string label = "instance");

/// Lift round trip, lifted norm, normality and centeredness of the lift.
CaseReport verify_kernel(const KernelSpec& ks, const VerifyOptions& opts,
                         std::string label = "kernel");

struct SuiteReport {
  std::vector<CaseReport> cases;
  bool passed() const;
};

/// Seeded regression suite: `trials` random operators cycling through the
/// generator families, two fixtures and three kernels.
SuiteReport verify_suite(const VerifyOptions& opts);

nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const CaseReport& r);
nlohmann::json to_json(const SuiteReport& r, const VerifyOptions& opts);

}  // namespace condop
