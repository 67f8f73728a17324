#pragma once

#include <stdexcept>
#include <string>

namespace pdbps {

/// Shape or dimension mismatch between components that must agree.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data violates a declared invariant (range, normalization, flow).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear program has no feasible point; the caller decides the fallback.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// A runtime invariant of the learning loop was breached. This always
/// indicates an implementation bug, so runs abort instead of clamping.
class InvariantFailure : public std::runtime_error {
 public:
  explicit InvariantFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pdbps
