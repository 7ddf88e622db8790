#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tperc {

// Violated precondition: wrong dimensions, out-of-range indices, invalid config.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite or out-of-domain model parameter.
class ParameterDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Cholesky still fails after the jitter ladder is exhausted.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external input (CSV, config, JSON). `line` is 1-based, 0 if unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tperc
