#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace msr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat3X = Eigen::Matrix3Xd;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Invalid geometry, sizes, or parameter values.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical blow-up (NaN or velocity beyond the configured bound).
class InstabilityError : public std::runtime_error {
 public:
  explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate geometry encountered mid-computation (zero-length element).
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msr
