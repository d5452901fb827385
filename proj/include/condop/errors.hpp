#pragma once

#include <stdexcept>
#include <string>

namespace condop {

/// Shapes of functions, partitions and spaces do not agree, or a partition
/// is not a partition.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is outside its admissible range (negative tolerance,
/// n = 0 power, p <= 0, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An oracle-side precondition on a matrix failed (e.g. herm_power on a
/// matrix that is not Hermitian in the weighted inner product).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative routine did not converge.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) +
                           " iterations)"),
        iterations_(iterations) {}

  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

}  // namespace condop
