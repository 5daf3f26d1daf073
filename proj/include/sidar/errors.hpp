#pragma once

#include <stdexcept>
#include <string>

namespace sidar {

/// Base class for numerical failures raised by the solver stack.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The stage block matrix M_k(lambda) is numerically singular (2-norm
/// condition estimate above 1e14), which signals that lambda sits on or
/// below a feasibility boundary.
class SingularBlock : public SolverError {
 public:
  SingularBlock(const std::string& what, int stage, double condition)
      : SolverError(what), stage_(stage), condition_(condition) {}

  /// Failing sweep stage, or -1 when the matrix is not tied to a stage.
  int stage() const { return stage_; }
  double condition() const { return condition_; }

 private:
  int stage_;
  double condition_;
};

/// Bracket expansion for a scalar root find ran past 1e12 without a sign
/// change; the instance is numerically pathological.
class BracketFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The inner matrix of the Basar-Bernhard recursion form is singular.
class SingularInner : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Budget clipping emptied a disturbance grid in the brute-force game oracle.
class EmptyGrid : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace sidar
