#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contam {

/// Base class for all library errors. `exit_code()` is the process exit
/// status the CLI maps the error to (documented in `contam --help`).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual int exit_code() const { return 1; }
};

/// Invalid parameter values or malformed inputs (exit 2).
class ParameterDomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

class ConfigError : public ParameterDomainError {
 public:
  using ParameterDomainError::ParameterDomainError;
};

class EmptyDataError : public ParameterDomainError {
 public:
  using ParameterDomainError::ParameterDomainError;
};

/// A certification or construction-feasibility failure (exit 3).
class CertificationError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class ConstructionInfeasibleError : public CertificationError {
 public:
  using CertificationError::CertificationError;
};

/// The requested moment-matching order cannot be realized; carries the
/// largest order that the downward search found feasible.
class MomentBudgetExceededError : public ConstructionInfeasibleError {
 public:
  MomentBudgetExceededError(const std::string& msg, int requested, int feasible)
      : ConstructionInfeasibleError(msg), requested_m(requested), feasible_m(feasible) {}
  int requested_m;
  int feasible_m;
};

/// A resource guard tripped: tensor order, memory cap, dimension cap (exit 4).
class CapabilityError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

/// Numeric/statistical failure: quadrature non-convergence, infeasible
/// programs, under-sampled estimators (exit 5).
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 5; }
};

class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& msg, double achieved)
      : NumericError(msg), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

class InsufficientSamplesError : public NumericError {
 public:
  InsufficientSamplesError(const std::string& msg, std::size_t required, std::size_t got)
      : NumericError(msg), required_n(required), got_n(got) {}
  std::size_t required_n;
  std::size_t got_n;
};

class QuantileUnresolvableError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InfeasibleProgramError : public NumericError {
 public:
  InfeasibleProgramError(const std::string& msg, double residual)
      : NumericError(msg), best_residual(residual) {}
  double best_residual;
};

}  // namespace contam
