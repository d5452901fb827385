#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace condop::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kInputError = 2;
inline constexpr int kNonConvergence = 3;

/// Runs one command. `args` excludes the program name, e.g.
/// {"check", "instance.json", "--format", "structured"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace condop::cli
