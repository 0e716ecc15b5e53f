#pragma once

#include <stdexcept>
#include <string>

namespace hippo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A finite bit source ran out before the requested index.
class SourceExhausted : public Error {
 public:
  using Error::Error;
};

/// An alpha prefix is too short to determine the requested Q bit.
class InsufficientBits : public Error {
 public:
  using Error::Error;
};

/// Two strings that must have equal length do not.
class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed bit file, rational literal or config document.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A named precondition clause failed. `clause()` identifies which one.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(std::string clause)
      : Error("precondition violated: " + clause), clause_(std::move(clause)) {}
  const std::string& clause() const noexcept { return clause_; }

 private:
  std::string clause_;
};

/// A value type was constructed in a state its invariants forbid.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed the configured node budget.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// A selection rule read the same position twice along one history.
class SelectionViolation : public Error {
 public:
  using Error::Error;
};

/// A KL bet rule broke the fairness identity.
class FairnessViolation : public Error {
 public:
  using Error::Error;
};

/// A selected position has bias at or above p + tau.
class BiasTooLarge : public Error {
 public:
  using Error::Error;
};

class NoDeltaFound : public Error {
 public:
  using Error::Error;
};

/// Fewer selected bits than the requested tail window.
class InsufficientSelection : public Error {
 public:
  using Error::Error;
};

}  // namespace hippo
