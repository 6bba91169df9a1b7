#pragma once

#include <stdexcept>
#include <string>

namespace qdoubling {

/// Bad parameters or malformed input (usage-level error).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Group-spec / subset-spec schema violation. `pointer` is a JSON pointer
/// to the offending node ("" for the document root).
class SchemaError : public InvalidArgument {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : InvalidArgument((pointer.empty() ? std::string("/") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

/// A table does not satisfy the group axioms.
class GroupAxiomError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Enumeration or validation would exceed a configured size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Subsets or quotients from different groups were combined.
class OwnerMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An operation that is only defined for finite groups was asked of a lazy one.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An exact identity or proved inequality failed. Always an implementation
/// bug for proved statements; carries whatever replay data the caller had.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qdoubling
