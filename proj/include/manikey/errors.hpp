#pragma once

#include <stdexcept>
#include <string>

namespace manikey {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent or empty data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure such as a singular solve (CLI exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

class EmptyCapture : public DataError {
 public:
  EmptyCapture() : DataError("capture contains no points in any view") {}
};

class AllPointsFiltered : public DataError {
 public:
  AllPointsFiltered() : DataError("outlier filtering removed every point") {}
};

class ShapeMismatch : public DataError {
 public:
  explicit ShapeMismatch(const std::string& what) : DataError("shape mismatch: " + what) {}
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& file, const std::string& what)
      : DataError("parse error in '" + file + "': " + what) {}
};

class InvalidK : public DataError {
 public:
  InvalidK(int k, long n)
      : DataError("invalid k=" + std::to_string(k) + " for cloud of " + std::to_string(n) +
                  " points (need n > k >= 1)") {}
};

class InvalidPermutation : public DataError {
 public:
  explicit InvalidPermutation(const std::string& what)
      : DataError("invalid permutation: " + what) {}
};

class ConfigMismatch : public DataError {
 public:
  explicit ConfigMismatch(const std::string& what) : DataError("config mismatch: " + what) {}
};

class EmptyDataset : public DataError {
 public:
  explicit EmptyDataset(const std::string& dir) : DataError("no samples found in '" + dir + "'") {}
};

class InvalidParams : public DataError {
 public:
  explicit InvalidParams(const std::string& what) : DataError("invalid parameters: " + what) {}
};

class NonFiniteInput : public NumericError {
 public:
  explicit NonFiniteInput(const std::string& what)
      : NumericError("non-finite input: " + what) {}
};

class SolveFailed : public NumericError {
 public:
  SolveFailed(const std::string& what, double residual)
      : NumericError("linear solve failed (" + what + "), residual norm " +
                     std::to_string(residual)),
        residual_norm(residual) {}
  double residual_norm;
};

}  // namespace manikey
