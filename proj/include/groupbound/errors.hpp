#pragma once

#include <stdexcept>
#include <string>

namespace groupbound {

/// Inconsistent shapes between matrices/vectors handed to an operation.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// The solver exhausted its iteration cap or hit an internal inconsistency.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// No coefficient vector satisfies the requested linear system.
class InfeasibleSystem : public std::runtime_error {
 public:
  explicit InfeasibleSystem(const std::string& what) : std::runtime_error(what) {}
};

/// Vertex-count search exceeded its cap without reaching target coverage.
class CalibrationDiverged : public std::runtime_error {
 public:
  explicit CalibrationDiverged(const std::string& what) : std::runtime_error(what) {}
};

/// No cache entry for (dim, alpha) and on-the-fly calibration is disabled.
class CalibrationMissing : public std::runtime_error {
 public:
  explicit CalibrationMissing(const std::string& what) : std::runtime_error(what) {}
};

/// Coordinate descent failed to converge within the sweep cap.
class NonConvergence : public std::runtime_error {
 public:
  explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// Requested simulation setting name is not one of (i)..(vi).
class UnknownSetting : public std::invalid_argument {
 public:
  explicit UnknownSetting(const std::string& what) : std::invalid_argument(what) {}
};

/// Block covariance matrix failed Cholesky even after a jitter retry.
class CovarianceNotPSD : public std::runtime_error {
 public:
  explicit CovarianceNotPSD(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace groupbound
