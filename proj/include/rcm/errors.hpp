#pragma once

#include <stdexcept>
#include <string>

namespace rcm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not fit together, or an unsupported dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numeric input (matrix entry, tolerance, config field) outside its domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Every diagonal entry of the pivoted QR factor of A^T fell below the rank tolerance.
class RankZero : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient A whose dependent rows disagree with b.
class InconsistentConstraints : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

/// The regularized matrix (sigma0/dt) I + H is numerically singular.
class SingularFactor : public Error {
 public:
  using Error::Error;
};

class SingularKkt : public Error {
 public:
  using Error::Error;
};

class UnknownProblem : public Error {
 public:
  using Error::Error;
};

}  // namespace rcm
