#pragma once

#include <stdexcept>
#include <string>

namespace softmix {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract inputs (dimension mismatch, non-finite
// entries, invalid configuration values).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A computation produced non-finite or meaningless values (likelihood
// turned NaN, all-zero responsibility column, ...).
class NumericDegeneracyError : public Error {
 public:
  using Error::Error;
};

// Requested moment degree exceeds what double precision can support.
class UnsupportedDegreeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Recoverable failures of the moment-based estimator. The benchmark
// records these as a status instead of aborting the run.
class MomFailureError : public Error {
 public:
  MomFailureError(const std::string& stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class ProjectionFailureError : public MomFailureError {
 public:
  ProjectionFailureError(const std::string& what, double infeasibility)
      : MomFailureError("projection", what), infeasibility_(infeasibility) {}
  double infeasibility() const { return infeasibility_; }

 private:
  double infeasibility_;
};

class DegenerateMomentsError : public MomFailureError {
 public:
  explicit DegenerateMomentsError(const std::string& what)
      : MomFailureError("roots", what) {}
};

class ComplexRootError : public MomFailureError {
 public:
  explicit ComplexRootError(const std::string& what)
      : MomFailureError("roots", what) {}
};

class AxisSelectionError : public MomFailureError {
 public:
  explicit AxisSelectionError(const std::string& what)
      : MomFailureError("axis", what) {}
};

}  // namespace softmix
