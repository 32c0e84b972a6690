#pragma once

#include <stdexcept>
#include <string>

namespace mtsw {

// Parameters violate a documented precondition (n <= 2k, p >= 1, ...).
class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ScanLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRootFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoCollapseFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fixed-step integration lost conservation of total mass.
class StepSizeRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtsw
