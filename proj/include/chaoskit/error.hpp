#pragma once

#include <stdexcept>
#include <string>

namespace chaoskit {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A product or operator would need polynomial degrees beyond a basis' max_degree.
class DegreeOverflow : public Error {
 public:
  using Error::Error;
};

/// Two operands live on different product spaces.
class SpaceMismatch : public Error {
 public:
  using Error::Error;
};

/// An operation's precondition does not hold (e.g. a non-eigenfunction passed to a chaos check).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The generator eigenrelation failed to verify while building a basis.
class EigenrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace chaoskit
