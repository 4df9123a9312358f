#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wkam {

/// Base for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad family tag, infeasible grid, malformed config.
class ConfigurationError : public Error {
public:
  using Error::Error;
};

/// A precondition of an operation does not hold (e.g. non-hyperbolic orbit).
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Non-finite state while integrating an ODE.
class IntegrationError : public Error {
public:
  IntegrationError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

private:
  double last_valid_time_;
};

/// Newton shooting did not reach the requested residual.
class OrbitNotFound : public Error {
public:
  OrbitNotFound(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// An iterative scheme stopped before meeting its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

private:
  std::vector<double> trace_;
};

/// Computed quantity violates a structural identity (symplecticity, graph transversality).
class NumericalError : public Error {
public:
  using Error::Error;
};

}  // namespace wkam
