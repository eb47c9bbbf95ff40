#pragma once

#include <stdexcept>
#include <string>

namespace varpro {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point dimensions do not match the problem's (p, q).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation was evaluated outside its domain (e.g. x = 0 for the rank-1
/// factorization inner solve).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve stopped above its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual_norm)
      : Error(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Input violates a structural precondition (non-symmetric matrix,
/// non-orthonormal basis, bad configuration value, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A candidate handed to the classifier is not a stationary point of the
/// reduced problem. Carries the offending gradient norm.
class NotStationaryError : public Error {
 public:
  NotStationaryError(const std::string& what, double grad_norm)
      : Error(what), grad_norm_(grad_norm) {}
  double grad_norm() const { return grad_norm_; }

 private:
  double grad_norm_;
};

/// A matrix required to have full rank is rank deficient.
class RankError : public Error {
 public:
  using Error::Error;
};

/// The problem does not implement the requested operation.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of the requested analysis does not hold at the given point
/// (e.g. the inner Hessian block is not positive definite).
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace varpro
