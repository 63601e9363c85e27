#pragma once

#include <stdexcept>
#include <string>

namespace pfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sample position fell outside the region where full kernel stencils exist.
class OutOfDomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Non-finite values or an unusable state. `pass` names the pass that produced it.
class NumericalError : public Error {
 public:
  NumericalError(std::string pass, const std::string& message)
      : Error(pass + ": " + message), pass_(std::move(pass)) {}
  const std::string& pass() const noexcept { return pass_; }

 private:
  std::string pass_;
};

/// The Poisson solve did not reach its tolerance within the iteration cap.
class SolverError : public NumericalError {
 public:
  SolverError(int iterations, double residual)
      : NumericalError("projection", "conjugate gradient did not converge after " +
                                         std::to_string(iterations) + " iterations (relative residual " +
                                         std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace pfm
