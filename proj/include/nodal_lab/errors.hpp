#pragma once

#include <stdexcept>
#include <string>

namespace nodal_lab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad dimension, radius, parameter range).
struct InvalidInput : Error {
  using Error::Error;
};

/// A ratio-defined quantity has a denominator below its scale-relative threshold.
struct DegenerateDenominator : Error {
  using Error::Error;
};

/// Sampled data failed a sanity check (non-finite values and similar).
struct DiagnosticFailure : Error {
  using Error::Error;
};

struct SolverError : Error {
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

/// Bad configuration or command line; carries the offending field path.
struct UsageError : Error {
  UsageError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path(path) {}
  std::string path;
};

}  // namespace nodal_lab
