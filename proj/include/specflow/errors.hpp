#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

/// Process exit codes shared by the CLI and the error hierarchy.
enum class ExitCode : int {
  ok = 0,
  input_error = 1,
  certification_failure = 2,
  consistency_fault = 3,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::input_error)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Bad or out-of-contract input. All of these map to exit code 1.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what, ExitCode::input_error) {}
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class NonHermitianError : public InputError {
 public:
  NonHermitianError(const std::string& what, double defect)
      : InputError(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

class NotUnitaryError : public InputError {
 public:
  using InputError::InputError;
};

class NotProjectionError : public InputError {
 public:
  using InputError::InputError;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// A function of the calculus is not finite at some eigenvalue.
class DomainError : public InputError {
 public:
  DomainError(const std::string& what, double eigenvalue)
      : InputError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// An eigenvalue sits within tolerance of a spectral interval endpoint.
class BoundaryCollision : public InputError {
 public:
  BoundaryCollision(const std::string& what, double eigenvalue)
      : InputError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class ContourCollision : public InputError {
 public:
  ContourCollision(const std::string& what, double eigenvalue)
      : InputError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class DefinitenessError : public InputError {
 public:
  DefinitenessError(const std::string& what, double lambda_min)
      : InputError(what), lambda_min_(lambda_min) {}
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

class InvertibilityError : public InputError {
 public:
  using InputError::InputError;
};

/// Input lies outside the image of a transform (Riesz ball, Cayley image).
class ImageMembershipError : public InputError {
 public:
  using InputError::InputError;
};

/// +1 (near-)eigenvalue of a unitary: the inverse Cayley transform is undefined.
class PointAtInfinityError : public InputError {
 public:
  using InputError::InputError;
};

/// Path endpoint is not invertible enough for the endpoint convention.
class EndpointError : public InputError {
 public:
  EndpointError(const std::string& what, double t, double min_abs_eigenvalue)
      : InputError(what), t_(t), min_abs_(min_abs_eigenvalue) {}
  double t() const noexcept { return t_; }
  double min_abs_eigenvalue() const noexcept { return min_abs_; }

 private:
  double t_;
  double min_abs_;
};

/// A certified computation could not be certified within its budget.
class CertificationFailure : public Error {
 public:
  CertificationFailure(const std::string& what, double t_lo, double t_hi)
      : Error(what, ExitCode::certification_failure), t_lo_(t_lo), t_hi_(t_hi) {}
  double t_lo() const noexcept { return t_lo_; }
  double t_hi() const noexcept { return t_hi_; }

 private:
  double t_lo_;
  double t_hi_;
};

/// Sampling was too coarse for a brute-force count to be trusted.
class ResolutionError : public CertificationFailure {
 public:
  using CertificationFailure::CertificationFailure;
};

class SamplingTooCoarse : public CertificationFailure {
 public:
  using CertificationFailure::CertificationFailure;
};

/// Two routes that must agree did not. Always a bug in the numerics.
class ConsistencyFault : public Error {
 public:
  explicit ConsistencyFault(const std::string& what)
      : Error(what, ExitCode::consistency_fault) {}
};

}  // namespace specflow
