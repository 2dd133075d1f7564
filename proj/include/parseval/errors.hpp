#pragma once

#include <stdexcept>
#include <string>

namespace parseval {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request would exceed the configured memory budget or a hard size cap.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An exact integer result does not fit the integer width.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class TableTooShort : public Error {
 public:
  using Error::Error;
};

/// A supplied derivative disagrees with finite differences of its function.
class InconsistentDerivative : public Error {
 public:
  using Error::Error;
};

/// Floating-point evaluation lost too much accuracy to be trusted.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// The (r, s) enumeration of a U-split would pass its cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace parseval
