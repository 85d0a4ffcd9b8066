#pragma once

#include <stdexcept>
#include <string>

namespace persuasion {

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad inputs: violated type invariants, rejected configs, infeasible
/// requests. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// The instance assumption q*mu > (1-q)*lambda failed, or a source/instance
/// field is out of range.
class InvalidInstance : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// s = c = 0 where the joint chain's closed form is undefined.
class DegenerateRates : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NonPositiveTheta : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Residual budget for the water-filling step must be strictly positive.
class InfeasibleResidual : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Enumeration caps exceeded (subset search, oracle grid).
class TooLarge : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NonPositiveHorizon : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class InvalidProfile : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Config file problems (syntax, schema, unknown keys).
class ConfigError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Internal numerical failure, e.g. the dual bisection hit its iteration
/// cap. The CLI maps these to exit code 3.
class NumericalFailure : public Error {
public:
  using Error::Error;
};

}  // namespace persuasion
