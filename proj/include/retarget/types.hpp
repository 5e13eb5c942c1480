#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace retarget {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Quat = Eigen::Quaterniond;

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input document (model, keypoints, trajectory, labels).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a model invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Mismatched dimensions between two inputs of an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state encountered while integrating dynamics.
class DynamicsError : public Error {
 public:
  using Error::Error;
};

/// Cross-product matrix: skew(v) * u == v.cross(u).
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

/// splitmix64 mixing step; used to derive independent RNG streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace retarget
