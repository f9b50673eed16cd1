#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tollcast {

// Invalid user input: instance files, flow files, CLI arguments.
// Carries the offending field path when known (e.g. "edges[2].pieces[1].breakpoint").
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Operation does not support this externality shape (load-dependent
// externality coefficients are accepted by fixed-price operations only).
class UnsupportedExternalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested budget / credit scheme cannot be met by any feasible flow.
// `certificate` holds a printable infeasibility certificate when one exists.
class InfeasibleBudgetError : public std::runtime_error {
 public:
  explicit InfeasibleBudgetError(const std::string& what,
                                 std::vector<std::string> certificate = {})
      : std::runtime_error(what), certificate_(std::move(certificate)) {}
  const std::vector<std::string>& certificate() const { return certificate_; }

 private:
  std::vector<std::string> certificate_;
};

// Path enumeration exceeded the caller-supplied cap.
class PathLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated internal invariant: failed self-check, cycling guard, or an
// arithmetic operation outside the supported domain. Always a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace tollcast
