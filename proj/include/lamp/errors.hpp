#pragma once

#include <stdexcept>
#include <string>

namespace lamp {

// Every library failure derives from Error so callers (the CLI in particular)
// can map categories onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (negative beta, bad order, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Natural parameter outside the family's xi-domain. `row` is the observation
// index when the failure came from a dataset-level evaluation, -1 otherwise.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, long row = -1) : Error(what), row_(row) {}
  long row() const noexcept { return row_; }

 private:
  long row_;
};

// Malformed or degenerate data: constant columns, single-class responses,
// non-finite cells, CSV parse failures.
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown inside an algorithm (non-positive coordinate curvature,
// failed factorization, divergent MLE).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Evaluation of a second derivative exactly at a SCAD/MCP kink.
class KinkError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lamp
