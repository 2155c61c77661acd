// Common aliases and error types shared across the library.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ttrack {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Base for all recoverable library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ||delta|| > 1 handed to a small-vector quaternion constructor; the usual
// symptom of a diverging filter.
struct ErrorStateOverflow : Error {
  using Error::Error;
};

struct FilterDivergence : Error {
  explicit FilterDivergence(double t_s)
      : Error("filter divergence at t=" + std::to_string(t_s) + " s"), t(t_s) {}
  double t;
};

// Degenerate geometry: the Horn eigenproblem has a (near-)repeated maximum
// eigenvalue, so the rotation is not unique.
struct AlignmentAmbiguous : Error {
  using Error::Error;
};

struct MeasurementRejected : Error {
  using Error::Error;
};

}  // namespace ttrack
