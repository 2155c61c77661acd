// 21-state multiplicative extended Kalman filter: linearization, van Loan
// discretization, correction with multiplicative quaternion reset, and
// mean/covariance propagation.
#pragma once

#include <string>
#include <vector>

#include "ttrack/dynamics.hpp"
#include "ttrack/quat.hpp"
#include "ttrack/types.hpp"

namespace ttrack {

using Mat21 = Eigen::Matrix<double, 21, 21>;
using Mat21x6 = Eigen::Matrix<double, 21, 6>;
using Mat6x21 = Eigen::Matrix<double, 6, 21>;
using Vec21 = Eigen::Matrix<double, 21, 1>;

struct NoiseConfig {
  double sigma_tau = 1e-4;  // rad/s^2, torque perturbation intensity per axis
  double sigma_f = 1e-4;    // m/s^2, force perturbation intensity per axis
  Mat6 r = default_r();     // measurement covariance [position; quaternion vector]

  Mat6 sigma() const {
    Vec6 d;
    d << sigma_tau * sigma_tau, sigma_tau * sigma_tau, sigma_tau * sigma_tau,
        sigma_f * sigma_f, sigma_f * sigma_f, sigma_f * sigma_f;
    return d.asDiagonal();
  }

  static Mat6 default_r() {
    Vec6 d;
    d << 1e-4, 1e-4, 1e-4, 2.5e-5, 2.5e-5, 2.5e-5;  // (0.01 m)^2, (0.005)^2
    return d.asDiagonal();
  }
};

struct FilterState {
  MeanState x;
  Mat21 p = default_initial_covariance();
  double t = 0.0;

  static Mat21 default_initial_covariance();
};

struct Measurement {
  Vec3 r{0, 0, 0};     // POR position in {A}, m
  UnitQuaternion q;    // POR orientation, {C} to {A}
  double t = 0.0;
};

// Continuous error-state system matrix; depends on the estimate only
// through omega and p.
Mat21 build_F(const MeanState& x, double n);

// Noise input matrix: torque gain in the omega block, identity in the
// velocity block.
Mat21x6 build_B(const Vec3& p);

struct Discretization {
  Mat21 phi;
  Mat21 q;
};

// Van Loan construction: D = exp([[ -F, B Sigma B^T ], [0, F^T]] T),
// Phi = D22^T, Q = Phi * D12, symmetrized and floored to PSD.
Discretization van_loan_discretize(const Mat21& f, const Mat21x6& b, const Mat6& sigma,
                                   double T);

struct PredictedMeasurement {
  Vec6 z_hat;   // [r_c + A(mu) rho ; 0]
  Mat6x21 h;    // sensitivity at zero error state
};

PredictedMeasurement predict_measurement(const FilterState& state);

// [position residual ; vector part of eta^* otimes q otimes mu^*], the
// quaternion part sign-canonicalized to a non-negative scalar.
Vec6 innovation(const Measurement& meas, const FilterState& state);

// Kalman correction with Joseph-form covariance update and multiplicative
// quaternion reset. Throws MeasurementRejected when the innovation
// covariance conditioning exceeds 1e12, FilterDivergence when the
// error-state quaternion update overflows.
FilterState ekf_correct(const FilterState& state, const Measurement& meas,
                        const NoiseConfig& noise);

// Mean propagation by RK4 sub-steps of the nonlinear model (the carried
// quaternion advances by the constant-rate closed form per sub-step) and
// covariance propagation by the van Loan discretization evaluated at the
// pre-propagation estimate.
FilterState ekf_propagate(const FilterState& state, const OrbitParams& orbit,
                          const NoiseConfig& noise, double T);

// One row of the filter trace CSV.
struct FilterTraceRow {
  double t = 0.0;
  MeanState x;
  Vec21 p_diag = Vec21::Zero();
  Vec6 innovation = Vec6::Zero();
  Vec6 innovation_cov_diag = Vec6::Zero();
  bool corrected = false;
};

void write_filter_trace_csv(const std::string& path, const std::vector<FilterTraceRow>& rows);

}  // namespace ttrack
