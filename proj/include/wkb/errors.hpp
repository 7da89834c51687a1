#pragma once

#include <stdexcept>
#include <string>

namespace wkb {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad grid, malformed config, violated structural assumption.
/// The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during a solve. The CLI maps these to exit code 3.
class SolverError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// f' fails to stay positive on the range the symmetrizer needs.
class AssumptionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PotentialError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Flow-map inversion failed: query outside the covered image or near a caustic.
class InversionError : public SolverError {
 public:
  using SolverError::SolverError;
};

class PastCausticError : public SolverError {
 public:
  using SolverError::SolverError;
};

class InstabilityError : public SolverError {
 public:
  using SolverError::SolverError;
};

class DomainTooSmallError : public SolverError {
 public:
  using SolverError::SolverError;
};

class ShockError : public SolverError {
 public:
  ShockError(const std::string& what, double time_reached)
      : SolverError(what), time_reached_(time_reached) {}
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wkb
