#pragma once

#include <stdexcept>
#include <string>

namespace csl {

/// Invalid or inconsistent user configuration. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: quadrature non-convergence, stability guard, positivity loss,
/// degenerate diagnostics, NaN in output. The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fock truncation too small for the requested operation.
class DimensionError : public NumericalError {
 public:
  DimensionError(const std::string& what, int suggested_nmax)
      : NumericalError(what), suggested_nmax_(suggested_nmax) {}
  int suggested_nmax() const noexcept { return suggested_nmax_; }

 private:
  int suggested_nmax_;
};

}  // namespace csl
