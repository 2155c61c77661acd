// Rigid-body attitude dynamics in inertia-ratio form, relative orbital
// translation, and the ground-truth simulator.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttrack/icp.hpp"
#include "ttrack/quat.hpp"
#include "ttrack/rng.hpp"
#include "ttrack/types.hpp"

namespace ttrack {

// Dimensionless ratios p_x = (Iyy - Izz)/Ixx, p_y = (Izz - Ixx)/Iyy,
// p_z = (Ixx - Iyy)/Izz. Values constructed from physical inertias satisfy
// p_x + p_y + p_z + p_x p_y p_z = 0; the filter's free estimate does not.
struct InertiaRatios {
  double px = 0.0, py = 0.0, pz = 0.0;

  Vec3 as_vec3() const { return Vec3(px, py, pz); }
  static InertiaRatios from_vec3(const Vec3& v) { return InertiaRatios{v(0), v(1), v(2)}; }
};

InertiaRatios inertia_to_ratios(const Vec3& principal_moments);

// Torque-free angular acceleration (p_x w_y w_z, p_y w_x w_z, p_z w_x w_y).
Vec3 psi(const Vec3& omega, const InertiaRatios& p);

// diag{1, (1-p_y)/(1+p_x), (1+p_z)/(1-p_x)}; maps normalized torque
// perturbations into angular acceleration. Throws near p_x = +/-1.
Mat3 torque_gain(const InertiaRatios& p);

struct OrbitParams {
  double n = 0.0;                 // orbital rate, rad/s; 0 disables gravity terms
  double mu_earth = 3.986004418e14;  // m^3/s^2

  Vec3 n_vec() const { return Vec3(0, 0, n); }
  // Chaser position from Earth's center, [ (mu/n^2)^(1/3), 0, 0 ].
  Vec3 r_e() const;
};

// Nonlinear relative translational acceleration (Euler-Hill right-hand
// side). With n = 0 all gravity terms vanish.
Vec3 cw_accel(const Vec3& r_c, const Vec3& v_c, const OrbitParams& orbit);

// Linearized stiffness diag{3n^2, 0, -n^2}.
Mat3 cw_stiffness(double n);

// Error-state index layout; matches the rows/columns of the filter's F and B.
enum ErrorIndex : int {
  kDeltaMu = 0,
  kDeltaOmega = 3,
  kDeltaP = 6,
  kDeltaRc = 9,
  kDeltaVc = 12,
  kDeltaRho = 15,
  kDeltaEta = 18,
  kErrorDim = 21,
};

// The estimated quantities: 15 additive states plus two carried unit
// quaternions (mu: principal axes {B} wrt chaser {A}; eta: {C} wrt {B}).
struct MeanState {
  UnitQuaternion mu;
  Vec3 omega{0, 0, 0};  // rad/s, in {B}
  Vec3 p{0, 0, 0};      // inertia ratios
  Vec3 r_c{0, 0, 0};    // m, in {A}
  Vec3 v_c{0, 0, 0};    // m/s
  Vec3 rho{0, 0, 0};    // m, in {B}
  UnitQuaternion eta;
};

struct MeanDerivative {
  Vec4 mu_dot;
  Vec3 omega_dot;
  Vec3 r_c_dot;
  Vec3 v_c_dot;
  // p, rho, eta rates are identically zero
};

// Noise-free f(x): quaternion kinematics with the chaser orbital rate,
// torque-free Euler rotation, nonlinear Euler-Hill translation, constant
// parameters.
MeanDerivative state_derivative(const MeanState& x, const OrbitParams& orbit);

// Ground truth with physical inertia.
struct TargetTruth {
  UnitQuaternion mu;
  Vec3 omega{0, 0, 0};
  Vec3 r_c{0, 0, 0};
  Vec3 v_c{0, 0, 0};
  Vec3 rho{0, 0, 0};
  UnitQuaternion eta;
  Vec3 inertia{1, 1, 1};  // principal moments, kg m^2
};

// Optional process disturbances for the truth simulator, injected as
// zero-mean Gaussian increments per integration step.
struct TruthNoise {
  double sigma_tau = 0.0;  // rad/s^2 per sqrt(Hz)
  double sigma_f = 0.0;    // m/s^2 per sqrt(Hz)
  RngStream* stream = nullptr;
};

// RK4 propagation of the full nonlinear truth over duration T at step dt,
// renormalizing the quaternion each step.
TargetTruth integrate_truth(const TargetTruth& truth, const OrbitParams& orbit, double T,
                            double dt, const TruthNoise* noise = nullptr);

// Pose of the point-of-reference frame {C}: rotation q = eta otimes mu,
// translation r = r_c + A(mu) rho.
Pose observed_pose(const TargetTruth& truth);
Pose observed_pose(const MeanState& state);

// CSV export of a truth trajectory (t, mu, omega, r_c, v_c, pose of {C}).
struct TruthSample {
  double t;
  TargetTruth truth;
};
void write_truth_csv(const std::string& path, const std::vector<TruthSample>& samples);

}  // namespace ttrack
