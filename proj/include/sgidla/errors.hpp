#pragma once

#include <stdexcept>
#include <string>

namespace sgidla {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (bad radius, eps out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A vertex that is not part of the graph was passed in.
class InvalidVertexError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A configured size guard (ball cap, exact-oracle state space) would be exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// A random walk reached its step cap before its stopping predicate fired.
class StepCapError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgidla
