#pragma once

#include <stdexcept>
#include <string>

namespace coas {

/// Input sizes or domains of two objects do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function with (numerically) zero total gradient was passed where a
/// non-constant one is required, e.g. as an argument of concordance.
class ConstantFunctionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input file; `line()` is 1-based, 0 when not applicable.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace coas
