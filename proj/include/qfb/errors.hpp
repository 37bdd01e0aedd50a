#pragma once

#include <stdexcept>
#include <string>

namespace qfb {

/// A parameter lies outside the domain of the operation (e.g. p > 1/2).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A value violates the invariants of its type (trace, Hermiticity, ...).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Tomographic data that cannot be inverted (empty basis, missing settings).
class ReconstructionError : public std::runtime_error {
 public:
  explicit ReconstructionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qfb
