#ifndef H2FLOW_ERRORS_HPP
#define H2FLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace h2flow {

/// Argument outside the domain of a constitutive law or a physical invariant.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base of the failures a Newton solve can report.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularLinearSystem : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonConvergence : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A residual or Jacobian evaluation hit a constitutive domain error at a trial point.
class EvaluationFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A time step failed even after the permitted number of step halvings.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string key, const std::string& constraint)
      : std::invalid_argument(key + ": " + constraint), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace h2flow

#endif  // H2FLOW_ERRORS_HPP
