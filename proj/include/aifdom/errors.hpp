#pragma once

#include <stdexcept>
#include <string>

namespace aifdom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a model or operation (negative concentration,
/// zero denominator, etc.).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Controller and plant fragments cannot be interconnected.
class CompositionError : public Error {
 public:
  using Error::Error;
};

class IntegratorFault : public Error {
 public:
  using Error::Error;
};

/// Step size fell below the representable minimum.
class StiffnessError : public IntegratorFault {
 public:
  using IntegratorFault::IntegratorFault;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class RegionError : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue sits on the dividing line Re(s) = -lambda.
class BoundarySplitError : public Error {
 public:
  using Error::Error;
};

/// A frequency-domain evaluation landed on (or too close to) a pole or the
/// critical point.
class ContourError : public Error {
 public:
  using Error::Error;
};

class MarginalWindingError : public ContourError {
 public:
  using ContourError::ContourError;
};

class UnsupportedDegreeError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace aifdom
