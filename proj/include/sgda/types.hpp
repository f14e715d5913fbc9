#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sgda {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;
using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

// Error hierarchy. Every failure raised by the library derives from Error so
// callers that only care about success can catch a single type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric input to a pure function (non-finite vector, lo > hi, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An oracle returned a non-finite value.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, Index coordinate)
      : Error(what), coordinate_(coordinate) {}
  Index coordinate() const noexcept { return coordinate_; }

 private:
  Index coordinate_;
};

/// An iterate left the box over which the Lipschitz constant is certified.
class RegionViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite iterate produced by a solver.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Inner iterative solve hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A checker was called outside its precondition (for example a KKT level
/// that the supplied pair does not meet).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& v) {
  return v.allFinite();
}

}  // namespace sgda
