#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace efcp {

/// Malformed input: dimension mismatch, invalid probabilities, bad config.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of the theory behind an operation does not hold
/// (non-RCE law, missing density hypothesis, unstructured initial states).
/// Distinct from InvalidInput: the request is well formed, the answer is
/// "this result does not apply".
class Refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed the configured work budget.
class BudgetExceeded : public Refusal {
 public:
  BudgetExceeded(const std::string& what, double required, double budget)
      : Refusal(what + " (required " + std::to_string(required) +
                ", budget " + std::to_string(budget) + ")"),
        required_(required),
        budget_(budget) {}

  double required() const noexcept { return required_; }
  double budget() const noexcept { return budget_; }

 private:
  double required_;
  double budget_;
};

}  // namespace efcp
