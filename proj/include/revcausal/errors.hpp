#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace revcausal {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The supplied edges contain a directed cycle.
class CycleError : public Error {
public:
  using Error::Error;
};

/// An operation named a variable that is not declared.
class UnknownNodeError : public Error {
public:
  using Error::Error;
};

/// A signal-extraction weight was requested with zero variance on both sides.
class DegenerateNoiseError : public Error {
public:
  using Error::Error;
};

/// Out-of-range or inconsistent parameters. Carries the offending field name
/// so front ends can report it.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& message)
      : Error(message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace revcausal
