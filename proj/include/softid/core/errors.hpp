#pragma once

#include <stdexcept>
#include <string>

namespace softid {

/// A value violates a domain invariant or an operation precondition.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested state transition clashes with the current state
/// (e.g. resolving an already-resolved review item).
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace softid
