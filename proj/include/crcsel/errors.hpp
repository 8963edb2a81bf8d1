#pragma once

#include <stdexcept>
#include <string>

namespace crcsel {

/// Input data or configuration failed validation (CLI exit status 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (dimension mismatch,
/// out-of-range argument).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal consistency check failed (CLI exit status 3).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace crcsel
