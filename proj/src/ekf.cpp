#include "ttrack/ekf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ttrack/linalg.hpp"

namespace ttrack {

Mat21 FilterState::default_initial_covariance() {
  Vec21 d;
  d.segment<3>(kDeltaMu).setConstant(0.1 * 0.1);
  d.segment<3>(kDeltaOmega).setConstant(0.1 * 0.1);
  d.segment<3>(kDeltaP).setConstant(0.5 * 0.5);
  d.segment<3>(kDeltaRc).setConstant(0.5 * 0.5);
  d.segment<3>(kDeltaVc).setConstant(0.1 * 0.1);
  d.segment<3>(kDeltaRho).setConstant(0.2 * 0.2);
  d.segment<3>(kDeltaEta).setConstant(0.1 * 0.1);
  return d.asDiagonal();
}

Mat21 build_F(const MeanState& x, double n) {
  Mat21 f = Mat21::Zero();
  f.block<3, 3>(kDeltaMu, kDeltaMu) = -skew(x.omega);
  f.block<3, 3>(kDeltaMu, kDeltaOmega) = 0.5 * Mat3::Identity();

  const Vec3& w = x.omega;
  const Vec3& p = x.p;
  Mat3 m;
  m << 0, p(0) * w.z(), p(0) * w.y(),
      p(1) * w.z(), 0, p(1) * w.x(),
      p(2) * w.y(), p(2) * w.x(), 0;
  f.block<3, 3>(kDeltaOmega, kDeltaOmega) = m;
  f.block<3, 3>(kDeltaOmega, kDeltaP) =
      Vec3(w.y() * w.z(), w.x() * w.z(), w.x() * w.y()).asDiagonal();

  f.block<3, 3>(kDeltaRc, kDeltaVc) = Mat3::Identity();
  f.block<3, 3>(kDeltaVc, kDeltaRc) = cw_stiffness(n);
  f.block<3, 3>(kDeltaVc, kDeltaVc) = -2.0 * skew(Vec3(0, 0, n));
  return f;
}

Mat21x6 build_B(const Vec3& p) {
  Mat21x6 b = Mat21x6::Zero();
  b.block<3, 3>(kDeltaOmega, 0) = torque_gain(InertiaRatios::from_vec3(p));
  b.block<3, 3>(kDeltaVc, 3) = Mat3::Identity();
  return b;
}

Discretization van_loan_discretize(const Mat21& f, const Mat21x6& b, const Mat6& sigma,
                                   double T) {
  if (T <= 0.0) throw Error("van_loan_discretize: T must be positive");
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(42, 42);
  big.topLeftCorner<21, 21>() = -f;
  big.topRightCorner<21, 21>() = b * sigma * b.transpose();
  big.bottomRightCorner<21, 21>() = f.transpose();
  const Eigen::MatrixXd d = matrix_exponential(big * T);

  Discretization out;
  out.phi = d.bottomRightCorner<21, 21>().transpose();
  Mat21 q = out.phi * d.topRightCorner<21, 21>();
  q = 0.5 * (q + q.transpose());

  Eigen::SelfAdjointEigenSolver<Mat21> es(q);
  if (es.eigenvalues().minCoeff() < 0.0) {
    const Vec21 clipped = es.eigenvalues().cwiseMax(0.0);
    q = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  }
  out.q = q;
  return out;
}

PredictedMeasurement predict_measurement(const FilterState& state) {
  const Mat3 a = to_rotation(state.x.mu);
  PredictedMeasurement out;
  out.z_hat.head<3>() = state.x.r_c + a * state.x.rho;
  out.z_hat.tail<3>().setZero();

  out.h = Mat6x21::Zero();
  out.h.block<3, 3>(0, kDeltaMu) = -2.0 * a * skew(state.x.rho);
  out.h.block<3, 3>(0, kDeltaRc) = Mat3::Identity();
  out.h.block<3, 3>(0, kDeltaRho) = a;
  out.h.block<3, 3>(3, kDeltaMu) = Mat3::Identity();
  out.h.block<3, 3>(3, kDeltaEta) = Mat3::Identity();
  return out;
}

Vec6 innovation(const Measurement& meas, const FilterState& state) {
  const PredictedMeasurement pm = predict_measurement(state);
  UnitQuaternion dq = qmul_otimes(qmul_otimes(conjugate(state.x.eta), meas.q),
                                  conjugate(state.x.mu));
  if (dq.scalar() < 0.0) dq = -dq;
  Vec6 nu;
  nu.head<3>() = meas.r - pm.z_hat.head<3>();
  nu.tail<3>() = dq.vec();
  return nu;
}

FilterState ekf_correct(const FilterState& state, const Measurement& meas,
                        const NoiseConfig& noise) {
  const PredictedMeasurement pm = predict_measurement(state);
  const Vec6 nu = innovation(meas, state);

  const Mat6 s = pm.h * state.p * pm.h.transpose() + noise.r;
  Eigen::SelfAdjointEigenSolver<Mat6> es(s);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    throw MeasurementRejected("measurement rejected (ill-conditioned)");

  const Mat21x6 k = s.ldlt().solve(pm.h * state.p).transpose();
  const Vec21 dx = k * nu;

  FilterState out = state;
  const Mat21 ikh = Mat21::Identity() - k * pm.h;
  out.p = ikh * state.p * ikh.transpose() + k * noise.r * k.transpose();
  out.p = 0.5 * (out.p + out.p.transpose());

  try {
    out.x.mu = qmul_otimes(from_small(dx.segment<3>(kDeltaMu)), state.x.mu);
    out.x.eta = qmul_otimes(state.x.eta, from_small(dx.segment<3>(kDeltaEta)));
  } catch (const ErrorStateOverflow&) {
    throw FilterDivergence(meas.t);
  }
  out.x.omega += dx.segment<3>(kDeltaOmega);
  out.x.p += dx.segment<3>(kDeltaP);
  out.x.r_c += dx.segment<3>(kDeltaRc);
  out.x.v_c += dx.segment<3>(kDeltaVc);
  out.x.rho += dx.segment<3>(kDeltaRho);
  out.t = meas.t;
  return out;
}

FilterState ekf_propagate(const FilterState& state, const OrbitParams& orbit,
                          const NoiseConfig& noise, double T) {
  if (T == 0.0) return state;
  if (T < 0.0) throw Error("ekf_propagate: negative T");

  FilterState out = state;

  // covariance first, linearized about the pre-propagation estimate
  const Mat21 f = build_F(state.x, orbit.n);
  const Mat21x6 b = build_B(state.x.p);
  const Discretization disc = van_loan_discretize(f, b, noise.sigma(), T);
  out.p = disc.phi * state.p * disc.phi.transpose() + disc.q;
  out.p = 0.5 * (out.p + out.p.transpose());

  // mean by RK4 sub-steps; the quaternion advances by the constant-rate
  // closed form per sub-step (the chaser-rate factor enters on the left)
  constexpr int kSubSteps = 10;
  const double h = T / kSubSteps;
  const UnitQuaternion spin_n =
      (orbit.n != 0.0)
          ? UnitQuaternion::from_axis_angle(Vec3(0, 0, -1.0), orbit.n * h)
          : UnitQuaternion::identity();
  for (int i = 0; i < kSubSteps; ++i) {
    const Vec3 w0 = out.x.omega;

    auto deriv = [&](const Vec3& w, const Vec3& rc, const Vec3& vc) {
      MeanState tmp = out.x;
      tmp.omega = w;
      tmp.r_c = rc;
      tmp.v_c = vc;
      const MeanDerivative md = state_derivative(tmp, orbit);
      return std::array<Vec3, 3>{md.omega_dot, md.r_c_dot, md.v_c_dot};
    };
    const auto k1 = deriv(out.x.omega, out.x.r_c, out.x.v_c);
    const auto k2 = deriv(out.x.omega + 0.5 * h * k1[0], out.x.r_c + 0.5 * h * k1[1],
                          out.x.v_c + 0.5 * h * k1[2]);
    const auto k3 = deriv(out.x.omega + 0.5 * h * k2[0], out.x.r_c + 0.5 * h * k2[1],
                          out.x.v_c + 0.5 * h * k2[2]);
    const auto k4 = deriv(out.x.omega + h * k3[0], out.x.r_c + h * k3[1],
                          out.x.v_c + h * k3[2]);
    out.x.omega += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    out.x.r_c += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    out.x.v_c += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);

    out.x.mu = propagate_const_rate(out.x.mu, 0.5 * (w0 + out.x.omega), h);
    if (orbit.n != 0.0) out.x.mu = qmul_circledast(spin_n, out.x.mu);
  }
  out.t = state.t + T;
  return out;
}

void write_filter_trace_csv(const std::string& path, const std::vector<FilterTraceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("write_filter_trace_csv: cannot open " + path);
  out << "t,corrected,mu_x,mu_y,mu_z,mu_o,omega_x,omega_y,omega_z,p_x,p_y,p_z,"
         "rc_x,rc_y,rc_z,vc_x,vc_y,vc_z,rho_x,rho_y,rho_z,eta_x,eta_y,eta_z,eta_o";
  for (int i = 0; i < 21; ++i) out << ",P" << i;
  for (int i = 0; i < 6; ++i) out << ",nu" << i;
  for (int i = 0; i < 6; ++i) out << ",S" << i;
  out << '\n';
  char buf[40];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << ',' << buf;
  };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.t);
    out << buf << ',' << (r.corrected ? 1 : 0);
    const Vec4 mu = r.x.mu.as_vec4();
    for (int i = 0; i < 4; ++i) put(mu(i));
    for (int i = 0; i < 3; ++i) put(r.x.omega(i));
    for (int i = 0; i < 3; ++i) put(r.x.p(i));
    for (int i = 0; i < 3; ++i) put(r.x.r_c(i));
    for (int i = 0; i < 3; ++i) put(r.x.v_c(i));
    for (int i = 0; i < 3; ++i) put(r.x.rho(i));
    const Vec4 eta = r.x.eta.as_vec4();
    for (int i = 0; i < 4; ++i) put(eta(i));
    for (int i = 0; i < 21; ++i) put(r.p_diag(i));
    for (int i = 0; i < 6; ++i) put(r.innovation(i));
    for (int i = 0; i < 6; ++i) put(r.innovation_cov_diag(i));
    out << '\n';
  }
}

}  // namespace ttrack
