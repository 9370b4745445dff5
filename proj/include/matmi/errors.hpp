#pragma once

#include <stdexcept>
#include <string>

namespace matmi {

// Bad user-supplied parameters (mesh sizes, phantom geometry, CFL, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Physically inadmissible model input, e.g. a nonpositive coefficient.
class ModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Data that cannot be processed (all-zero reference region, empty masks).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent API usage, e.g. fields living on different meshes.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace matmi
