#include "ttrack/quat.hpp"

#include <cmath>

namespace ttrack {

UnitQuaternion::UnitQuaternion(const Vec3& v, double o) : v_(v), o_(o) {
  const double n = std::sqrt(v_.squaredNorm() + o_ * o_);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("quaternion with zero or non-finite norm");
  v_ /= n;
  o_ /= n;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  return UnitQuaternion(std::sin(0.5 * angle_rad) * axis / n, std::cos(0.5 * angle_rad));
}

UnitQuaternion UnitQuaternion::operator-() const {
  UnitQuaternion q;
  q.v_ = -v_;
  q.o_ = -o_;
  return q;
}

Mat4 otimes_matrix(const UnitQuaternion& q) {
  Mat4 m;
  m.topLeftCorner<3, 3>() = -skew(q.vec()) + q.scalar() * Mat3::Identity();
  m.topRightCorner<3, 1>() = q.vec();
  m.bottomLeftCorner<1, 3>() = -q.vec().transpose();
  m(3, 3) = q.scalar();
  return m;
}

Mat4 circledast_matrix(const UnitQuaternion& q) {
  Mat4 m;
  m.topLeftCorner<3, 3>() = skew(q.vec()) + q.scalar() * Mat3::Identity();
  m.topRightCorner<3, 1>() = q.vec();
  m.bottomLeftCorner<1, 3>() = -q.vec().transpose();
  m(3, 3) = q.scalar();
  return m;
}

UnitQuaternion qmul_otimes(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  return UnitQuaternion::from_vec4(otimes_matrix(q1) * q2.as_vec4());
}

UnitQuaternion qmul_circledast(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  // q1 circledast q2 == q2 otimes q1; one kernel keeps the identity exact
  return qmul_otimes(q2, q1);
}

UnitQuaternion conjugate(const UnitQuaternion& q) {
  return UnitQuaternion(-q.vec(), q.scalar());
}

Mat3 to_rotation(const UnitQuaternion& q) {
  const Vec3& v = q.vec();
  const double o = q.scalar();
  return (2.0 * o * o - 1.0) * Mat3::Identity() + 2.0 * o * skew(v) +
         2.0 * v * v.transpose();
}

UnitQuaternion from_small(const Vec3& v) {
  const double n2 = v.squaredNorm();
  if (n2 > 1.0) throw ErrorStateOverflow("error-state overflow: |delta| > 1");
  return UnitQuaternion(v, std::sqrt(1.0 - n2));
}

UnitQuaternion propagate_const_rate(const UnitQuaternion& q, const Vec3& omega, double T) {
  const Vec3 wt = omega * T;
  const double theta = wt.norm();
  Vec3 sv;
  double so;
  if (theta < 1e-8) {
    // sin(x/2)/x and cos(x/2) to second order in x
    sv = 0.5 * wt * (1.0 - theta * theta / 24.0);
    so = 1.0 - theta * theta / 8.0;
  } else {
    sv = std::sin(0.5 * theta) * wt / theta;
    so = std::cos(0.5 * theta);
  }
  return qmul_otimes(UnitQuaternion(sv, so), q);
}

Vec3 rotate_vec(const UnitQuaternion& q, const Vec3& v) {
  // q circledast [v;0] circledast q*, carried as raw 4-vectors since the
  // embedded quaternion is not unit-norm.
  const Vec4 vq(v.x(), v.y(), v.z(), 0.0);
  const Vec4 t = circledast_matrix(q) * vq;
  Vec4 conj_q = q.as_vec4();
  conj_q.head<3>() *= -1.0;
  // circledast matrix of a raw 4-vector t
  Mat4 tm;
  tm.topLeftCorner<3, 3>() = skew(t.head<3>()) + t(3) * Mat3::Identity();
  tm.topRightCorner<3, 1>() = t.head<3>();
  tm.bottomLeftCorner<1, 3>() = -t.head<3>().transpose();
  tm(3, 3) = t(3);
  return (tm * conj_q).head<3>();
}

double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  const UnitQuaternion d = qmul_otimes(conjugate(a), b);
  const double c = std::min(1.0, std::abs(d.scalar()));
  return 2.0 * std::acos(c);
}

Vec3 to_euler_zyx(const UnitQuaternion& q) {
  const Mat3 a = to_rotation(q);
  const double pitch = std::asin(std::clamp(-a(2, 0), -1.0, 1.0));
  double yaw, roll;
  if (std::abs(a(2, 0)) < 1.0 - 1e-12) {
    yaw = std::atan2(a(1, 0), a(0, 0));
    roll = std::atan2(a(2, 1), a(2, 2));
  } else {
    yaw = std::atan2(-a(0, 1), a(1, 1));
    roll = 0.0;
  }
  return Vec3(yaw, pitch, roll);
}

}  // namespace ttrack
