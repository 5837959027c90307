// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace iasim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A documented precondition was violated (bad shapes, non-Hermitian input, ...).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& msg) : Error(msg) {}
};

/// Input is numerically degenerate for the requested operation (rank deficiency).
class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& msg) : Error(msg) {}
};

/// Linear system is singular or too ill-conditioned to solve reliably.
class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(const std::string& msg) : Error(msg) {}
};

/// An iterative numerical procedure failed (e.g. a bisection bracket was never found).
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& msg) : Error(msg) {}
};

/// A hard combinatorial size guard was exceeded (e.g. partition enumeration).
class SizeLimit : public Error {
 public:
  explicit SizeLimit(const std::string& msg) : Error(msg) {}
};

/// Configuration file or option set failed validation. Message carries the field path.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace iasim
