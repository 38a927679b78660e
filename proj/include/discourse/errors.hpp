#pragma once

#include <stdexcept>
#include <string>

namespace discourse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A script record does not conform to the schema; `field()` names the culprit.
class DecodeError : public Error {
 public:
  DecodeError(std::string field, const std::string& msg)
      : Error("decode error at '" + field + "': " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

/// Obligations must be taken from the top of their stack.
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// Illegal lifecycle transition on an obligation or proposal.
class TransitionError : public Error {
 public:
  using Error::Error;
};

/// A discharging act does not satisfy the obligation.
class MismatchError : public Error {
 public:
  using Error::Error;
};

class ReferenceError : public Error {
 public:
  using Error::Error;
};

class TimeOrderError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

class PolicyError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace discourse
