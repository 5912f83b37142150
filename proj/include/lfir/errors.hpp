#pragma once

#include <stdexcept>
#include <string>

namespace lfir {

// Base of every error thrown by the library. The split below mirrors the CLI
// exit-code contract: ParseError and IoError map to exit code 2, every other
// Error maps to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Inconsistent matrix or sequence dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input violates a mathematical precondition (assumption violations,
// out-of-range parameters, unstable closed loops, ambiguous order selection).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed to converge or lost too much accuracy.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Data content is unusable (non-finite values, missing required channels).
class DataError : public Error {
 public:
  using Error::Error;
};

// A sequence is too short for the requested index range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be solved against is numerically rank deficient.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double sigma_min)
      : Error(what), sigma_min(sigma_min) {}
  double sigma_min;
};

// The instrument cross-Gram is too close to singular to invert reliably.
class WeakInstrumentError : public ConditioningError {
 public:
  WeakInstrumentError(const std::string& what, double s_iv)
      : ConditioningError(what, s_iv), s_iv(s_iv) {}
  double s_iv;
};

// Requested realization or estimation order exceeds the numerical rank.
class RankError : public Error {
 public:
  using Error::Error;
};

// A Ho-Kalman step produced an unusable realization.
class RealizationError : public Error {
 public:
  using Error::Error;
};

// No stabilizing solution found (Riccati non-convergence and the like).
class StabilizabilityError : public Error {
 public:
  using Error::Error;
};

// Simulated state norm crossed the overflow guard.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

// Configuration valid in general but not supported by this implementation.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Malformed file content; maps to CLI exit code 2.
class ParseError : public Error {
 public:
  using Error::Error;
};

// File system failure; maps to CLI exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lfir
