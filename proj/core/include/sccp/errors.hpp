#pragma once

#include <stdexcept>
#include <string>

namespace sccp {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Expression evaluation failed (division by zero, non-finite result).
class EvalError : public Error {
  using Error::Error;
};

// TDSHA compilation failed.
class CompileError : public Error {
  using Error::Error;
};

// An update assignment is not of the constant-increment form X' = X + h.
class NotIncrementForm : public CompileError {
  using CompileError::CompileError;
};

// A kappa vector marks a non-approximable edge as continuous, or has the
// wrong shape for its RTS.
class InconsistentKappa : public CompileError {
  using CompileError::CompileError;
};

class ConfigError : public Error {
  using Error::Error;
};

// Simulation-time failure (non-finite drift, step underflow, chattering...).
class SimError : public Error {
  using Error::Error;
};

// All targets of an instantaneous choice have zero priority.
class ZeroTotalPriority : public SimError {
  using SimError::SimError;
};

}  // namespace sccp
