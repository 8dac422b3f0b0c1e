#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace ddsim {

/// Short scientific rendering for diagnostics.
inline std::string sci(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", value);
  return buf;
}

/// Base class for all simulator errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the mathematical domain of an operation (u <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Device geometry that cannot be meshed or indexed.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature hit its refinement limit.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved_tolerance)
      : Error(what), achieved_tolerance_(achieved_tolerance) {}

  double achieved_tolerance() const noexcept { return achieved_tolerance_; }

 private:
  double achieved_tolerance_;
};

/// Linear or nonlinear solver failure. Carries the last residual seen.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace ddsim
