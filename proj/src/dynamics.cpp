#include "ttrack/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ttrack {

InertiaRatios inertia_to_ratios(const Vec3& moments) {
  const double ixx = moments(0), iyy = moments(1), izz = moments(2);
  if (!(ixx > 0.0 && iyy > 0.0 && izz > 0.0))
    throw Error("inertia_to_ratios: moments must be positive");
  if (!(ixx + iyy > izz && iyy + izz > ixx && izz + ixx > iyy))
    throw Error("inertia_to_ratios: triangle inequality violated");
  return InertiaRatios{(iyy - izz) / ixx, (izz - ixx) / iyy, (ixx - iyy) / izz};
}

Vec3 psi(const Vec3& w, const InertiaRatios& p) {
  return Vec3(p.px * w.y() * w.z(), p.py * w.x() * w.z(), p.pz * w.x() * w.y());
}

Mat3 torque_gain(const InertiaRatios& p) {
  if (std::abs(1.0 + p.px) < 1e-9 || std::abs(1.0 - p.px) < 1e-9)
    throw Error("torque_gain: singular inertia ratio");
  return Vec3(1.0, (1.0 - p.py) / (1.0 + p.px), (1.0 + p.pz) / (1.0 - p.px)).asDiagonal();
}

Vec3 OrbitParams::r_e() const {
  if (n <= 0.0) return Vec3::Zero();
  return Vec3(std::cbrt(mu_earth / (n * n)), 0.0, 0.0);
}

Vec3 cw_accel(const Vec3& r_c, const Vec3& v_c, const OrbitParams& orbit) {
  if (orbit.n == 0.0) return Vec3::Zero();
  const Vec3 nv = orbit.n_vec();
  const Vec3 re = orbit.r_e();
  const Vec3 rel = re + r_c;
  const double dist = rel.norm();
  if (dist < 1.0) throw Error("cw_accel: singular gravity evaluation");
  return -2.0 * nv.cross(v_c) - nv.cross(nv.cross(r_c)) -
         orbit.mu_earth * rel / (dist * dist * dist) + orbit.n * orbit.n * re;
}

Mat3 cw_stiffness(double n) {
  return Vec3(3.0 * n * n, 0.0, -n * n).asDiagonal();
}

MeanDerivative state_derivative(const MeanState& x, const OrbitParams& orbit) {
  MeanDerivative d;
  // d(mu)/dt = 1/2 (omega otimes - n circledast) mu
  const Vec4 mu4 = x.mu.as_vec4();
  Mat4 wm;
  wm.topLeftCorner<3, 3>() = -skew(x.omega);
  wm.topRightCorner<3, 1>() = x.omega;
  wm.bottomLeftCorner<1, 3>() = -x.omega.transpose();
  wm(3, 3) = 0.0;
  Mat4 nm;
  const Vec3 nv = orbit.n_vec();
  nm.topLeftCorner<3, 3>() = skew(nv);
  nm.topRightCorner<3, 1>() = nv;
  nm.bottomLeftCorner<1, 3>() = -nv.transpose();
  nm(3, 3) = 0.0;
  d.mu_dot = 0.5 * (wm - nm) * mu4;
  d.omega_dot = psi(x.omega, InertiaRatios::from_vec3(x.p));
  d.r_c_dot = x.v_c;
  d.v_c_dot = cw_accel(x.r_c, x.v_c, orbit);
  return d;
}

namespace {

// Truth state packed for RK4: [mu(4), omega(3), r_c(3), v_c(3)].
using TruthVec = Eigen::Matrix<double, 13, 1>;

TruthVec truth_deriv(const TruthVec& s, const Vec3& inertia, const OrbitParams& orbit) {
  TruthVec ds;
  const Vec3 w = s.segment<3>(4);
  // quaternion kinematics, shared with the mean-state model
  MeanState tmp;
  tmp.mu = UnitQuaternion::from_vec4(s.head<4>().normalized());
  tmp.omega = w;
  tmp.r_c = s.segment<3>(7);
  tmp.v_c = s.segment<3>(10);
  const MeanDerivative md = state_derivative(tmp, orbit);
  ds.head<4>() = md.mu_dot;
  // Euler's equations with physical moments
  ds(4) = (inertia(1) - inertia(2)) * w.y() * w.z() / inertia(0);
  ds(5) = (inertia(2) - inertia(0)) * w.z() * w.x() / inertia(1);
  ds(6) = (inertia(0) - inertia(1)) * w.x() * w.y() / inertia(2);
  ds.segment<3>(7) = md.r_c_dot;
  ds.segment<3>(10) = md.v_c_dot;
  return ds;
}

}  // namespace

TargetTruth integrate_truth(const TargetTruth& truth, const OrbitParams& orbit, double T,
                            double dt, const TruthNoise* noise) {
  if (dt <= 0.0) throw Error("integrate_truth: dt must be positive");
  if (T < dt) throw Error("integrate_truth: T must be >= dt");

  TruthVec s;
  s.head<4>() = truth.mu.as_vec4();
  s.segment<3>(4) = truth.omega;
  s.segment<3>(7) = truth.r_c;
  s.segment<3>(10) = truth.v_c;

  const long steps = std::lround(T / dt);
  const double h = T / static_cast<double>(steps);
  const InertiaRatios p = inertia_to_ratios(truth.inertia);
  const Mat3 j = torque_gain(p);
  for (long k = 0; k < steps; ++k) {
    const TruthVec k1 = truth_deriv(s, truth.inertia, orbit);
    const TruthVec k2 = truth_deriv(s + 0.5 * h * k1, truth.inertia, orbit);
    const TruthVec k3 = truth_deriv(s + 0.5 * h * k2, truth.inertia, orbit);
    const TruthVec k4 = truth_deriv(s + h * k3, truth.inertia, orbit);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (noise && noise->stream) {
      const double root_h = std::sqrt(h);
      if (noise->sigma_tau > 0.0)
        s.segment<3>(4) += j * noise->stream->normal3(noise->sigma_tau * root_h);
      if (noise->sigma_f > 0.0)
        s.segment<3>(10) += noise->stream->normal3(noise->sigma_f * root_h);
    }
    s.head<4>().normalize();
  }

  TargetTruth out = truth;
  out.mu = UnitQuaternion::from_vec4(s.head<4>());
  out.omega = s.segment<3>(4);
  out.r_c = s.segment<3>(7);
  out.v_c = s.segment<3>(10);
  return out;
}

namespace {

Pose pose_of_por(const UnitQuaternion& mu, const UnitQuaternion& eta, const Vec3& r_c,
                 const Vec3& rho) {
  Pose pose;
  pose.rotation = qmul_otimes(eta, mu);
  pose.translation = r_c + rotate_vec(mu, rho);
  return pose;
}

}  // namespace

Pose observed_pose(const TargetTruth& t) { return pose_of_por(t.mu, t.eta, t.r_c, t.rho); }
Pose observed_pose(const MeanState& s) { return pose_of_por(s.mu, s.eta, s.r_c, s.rho); }

void write_truth_csv(const std::string& path, const std::vector<TruthSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error("write_truth_csv: cannot open " + path);
  out << "t,mu_x,mu_y,mu_z,mu_o,omega_x,omega_y,omega_z,rc_x,rc_y,rc_z,"
         "vc_x,vc_y,vc_z,q_x,q_y,q_z,q_o,r_x,r_y,r_z\n";
  char buf[40];
  auto put = [&](double x, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf << sep;
  };
  for (const auto& s : samples) {
    const Pose por = observed_pose(s.truth);
    put(s.t, ',');
    const Vec4 mu = s.truth.mu.as_vec4();
    for (int i = 0; i < 4; ++i) put(mu(i), ',');
    for (int i = 0; i < 3; ++i) put(s.truth.omega(i), ',');
    for (int i = 0; i < 3; ++i) put(s.truth.r_c(i), ',');
    for (int i = 0; i < 3; ++i) put(s.truth.v_c(i), ',');
    const Vec4 q = por.rotation.as_vec4();
    for (int i = 0; i < 4; ++i) put(q(i), ',');
    put(por.translation(0), ',');
    put(por.translation(1), ',');
    put(por.translation(2), '\n');
  }
}

}  // namespace ttrack
