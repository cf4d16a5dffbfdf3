#pragma once

#include <stdexcept>
#include <string>

namespace mrace {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed game or configuration supplied by the caller.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact method refused because the state or term count exceeds its budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative numerical method did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Walk simulation exceeded its hard round cap.
class RunawayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mrace
