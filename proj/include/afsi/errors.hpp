#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace afsi {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: unreadable files, malformed meshes, invalid configuration.
/// The CLI maps these to exit code 2.
class InputError : public Error {
public:
  using Error::Error;
};

class ParseError : public InputError {
public:
  ParseError(const std::string& what, int line)
      : InputError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

class ValidationError : public InputError {
public:
  using InputError::InputError;
};

class ConfigError : public InputError {
public:
  using InputError::InputError;
};

/// Numerical failure inside a solver. The CLI maps these to exit code 1.
class NumericalError : public Error {
public:
  using Error::Error;
};

class AssemblyError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class SolverError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Inverted or collapsed element (det F <= 0, negative deformed area).
class NonphysicalStateError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class MeshTanglingError : public NumericalError {
public:
  MeshTanglingError(const std::string& what, double min_area)
      : NumericalError(what), min_area_(min_area) {}
  double min_area() const { return min_area_; }

private:
  double min_area_;
};

/// Iterative process (Newton, coupling loop) failed to converge.
/// Carries the residual history so callers can report it.
class ConvergenceError : public NumericalError {
public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

private:
  std::vector<double> history_;
};

}  // namespace afsi
