#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rayleigh {

// Base of every error raised by the library. Preconditions violated by the
// caller (negative step sizes, bad indices) use std::invalid_argument and
// std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in an expression. `offset` is the 1-based byte position at
// which parsing stopped; end of input reports size() + 1.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t offset,
             std::vector<std::string> expected);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept {
    return expected_;
  }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// Raised when an expression cannot be attached to a system: coordinate index
// out of range, unknown parameter, velocity reference where none is allowed.
class BindError : public Error {
 public:
  using Error::Error;
};

// Evaluation left the real domain (ln of non-positive, sqrt of negative...).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpression);

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

// Invalid system or dissipation model (structural hypotheses not met).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Quadrature refinement failed to converge.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

class DynamicsError : public Error {
 public:
  enum class Kind { not_positive_definite, divergence, stiffness, max_steps };

  DynamicsError(Kind kind, const std::string& what, double t)
      : Error(what), kind_(kind), t_(t) {}

  Kind kind() const noexcept { return kind_; }
  double time() const noexcept { return t_; }

 private:
  Kind kind_;
  double t_;
};

}  // namespace rayleigh
