#pragma once

#include <stdexcept>
#include <string>

namespace d2 {

/// Malformed or inconsistent input: bad shapes, weights off the simplex,
/// unparsable files. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a valid result. Maps to CLI exit
/// code 3. `kind()` is a short machine-readable tag.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, std::string kind = "solver_failure")
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Entropic kernel or scaling vectors left the representable range.
class NumericOverflow : public SolverError {
 public:
  NumericOverflow(const std::string& what, int iteration)
      : SolverError(what, "numeric_overflow"), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace d2
