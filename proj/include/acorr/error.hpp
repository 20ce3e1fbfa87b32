#pragma once

#include <stdexcept>
#include <string>

namespace acorr {

/// Base of every error raised by the library. The CLI maps each subclass to
/// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable, malformed, or not writable.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (dims mismatch, bad region, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf or otherwise left the finite domain.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace acorr
