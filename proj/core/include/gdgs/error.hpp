#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gdgs {

enum class ErrorKind {
  InvalidArgument,
  InvalidParticle,
  NumericalDegeneracy,
  Parse,
  Io,
  ContractViolation,
  NonConvergence,
  ShapeMismatch,
  Spec,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown by iterative solvers; carries the relative residual after each cycle.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, std::vector<double> history)
      : Error(ErrorKind::NonConvergence, message), history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace gdgs
