// Unit quaternion algebra.
//
// Storage order is [vector; scalar]. Two products are provided, written
// here as otimes and circledast; they are mutual operand swaps,
//   q1 circledast q2 == q2 otimes q1,
// and compose with the rotation matrix as
//   to_rotation(q1 circledast q2) == to_rotation(q1) * to_rotation(q2).
#pragma once

#include "ttrack/types.hpp"

namespace ttrack {

class UnitQuaternion {
 public:
  // Identity rotation.
  UnitQuaternion() : v_(0, 0, 0), o_(1.0) {}

  // Normalizes on construction; a zero quaternion is rejected.
  UnitQuaternion(const Vec3& v, double o);

  static UnitQuaternion identity() { return UnitQuaternion(); }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle_rad);

  const Vec3& vec() const { return v_; }
  double scalar() const { return o_; }

  Vec4 as_vec4() const { return Vec4(v_.x(), v_.y(), v_.z(), o_); }
  static UnitQuaternion from_vec4(const Vec4& q) { return UnitQuaternion(q.head<3>(), q(3)); }

  UnitQuaternion operator-() const;

 private:
  Vec3 v_;
  double o_;
};

// Left-product operator matrices, acting on [v; o] column quaternions.
Mat4 otimes_matrix(const UnitQuaternion& q);
Mat4 circledast_matrix(const UnitQuaternion& q);

// q1 otimes q2 and q1 circledast q2; results renormalized.
UnitQuaternion qmul_otimes(const UnitQuaternion& q1, const UnitQuaternion& q2);
UnitQuaternion qmul_circledast(const UnitQuaternion& q1, const UnitQuaternion& q2);

// Vector part negated, scalar preserved: q* otimes q == identity.
UnitQuaternion conjugate(const UnitQuaternion& q);

// Direction-cosine matrix A(q) = (2 q_o^2 - 1) I + 2 q_o [q_v x] + 2 q_v q_v^T.
Mat3 to_rotation(const UnitQuaternion& q);

// [v; sqrt(1 - ||v||^2)]. Throws ErrorStateOverflow when ||v|| > 1.
UnitQuaternion from_small(const Vec3& v);

// Closed-form propagation under a constant body rate:
//   result = [sin(|w|T/2) w/|w| ; cos(|w|T/2)] otimes q.
// Falls back to a second-order series in wT below 1e-8 rad.
UnitQuaternion propagate_const_rate(const UnitQuaternion& q, const Vec3& omega, double T);

// Rotates v by the quaternion sandwich product; equals to_rotation(q) * v.
Vec3 rotate_vec(const UnitQuaternion& q, const Vec3& v);

// Geodesic angle between the rotations represented by a and b, in [0, pi].
double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b);

// Z-Y-X (yaw, pitch, roll) angles of to_rotation(q), for log output.
Vec3 to_euler_zyx(const UnitQuaternion& q);

}  // namespace ttrack
