#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "condop/condop_core.hpp"
#include "condop/examples_gen.hpp"
#include "condop/kernel_ops.hpp"

namespace condop {

/// Malformed or invalid instance document. The message names the line and
/// column (syntax errors) or the JSON pointer of the offending field.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An instance file: exactly one of an explicit operator, a kernel or a
/// recipe.
///
///   {"points": [{"id": "a", "weight": 0.5}, ...],
///    "partition": [["a", "b"], ...],
///    "u": [[re, im], ...], "w": [[re, im], ...]}
///
///   {"points": [...], "kernel": [[[re, im], ...], ...]}
///
///   {"recipe": {"kind": "random", "seed": 7, "n_points": 8, ...}}
///
/// u and w may also be objects keyed by point id.
struct Instance {
  std::optional<CondOpSpec> spec;
  std::optional<KernelSpec> kernel;
  std::optional<InstanceRecipe> recipe;

  static Instance of(CondOpSpec s);
  static Instance of(KernelSpec k);
  static Instance of(InstanceRecipe r);

  bool operator==(const Instance&) const = default;
};

Instance parse_instance(std::string_view text);
/// Throws InputError when the file cannot be read or parsed.
Instance load_instance(const std::string& path);

nlohmann::json to_json(const Instance& inst);
/// Canonical text: two-space indented JSON with a trailing newline.
std::string serialize(const Instance& inst);
/// Lower-case hex SHA-256 of serialize(inst).
std::string digest(const Instance& inst);

std::string sha256_hex(std::string_view data);

/// The operator the instance describes. Kernels are normalized to a
/// probability measure and lifted (n <= kMaxExplicitLift).
CondOpSpec resolve(const Instance& inst);

}  // namespace condop
