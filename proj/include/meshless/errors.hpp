#pragma once

#include <stdexcept>
#include <string>

namespace meshless {

// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid argument values (nonpositive spacing, bad degree, ...).
class ParameterError : public Error {
  public:
    using Error::Error;
};

// Size mismatches and too-small inputs (k > N, |P| < 2, ...).
class SizeError : public Error {
  public:
    using Error::Error;
};

// A stencil's augmented interpolation matrix is singular or nearly so.
class StencilSingularError : public Error {
  public:
    StencilSingularError(int center, const std::string& what)
        : Error(what), center_index(center) {}
    int center_index;
};

// The constrained least-squares fit has a singular KKT system.
class FitSingularError : public Error {
  public:
    using Error::Error;
};

// Rank deficiency or non-convergence in the global least-squares solve.
class SolverError : public Error {
  public:
    using Error::Error;
};

// Degenerate geometry input: repeated vertices, zero tangent, empty domain,
// or scaled data escaping the unit box.
class GeometryError : public Error {
  public:
    using Error::Error;
};

// Configuration file problems; the message names the offending field.
class ConfigError : public Error {
  public:
    using Error::Error;
};

// File reading/writing failures.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace meshless
