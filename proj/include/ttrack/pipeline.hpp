// Scenario orchestration: truth simulation, scan generation, ICP and EKF in
// closed-loop (filter prediction seeds ICP) or open-loop (ICP seeds itself)
// configuration, plus tracking metrics.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ttrack/dynamics.hpp"
#include "ttrack/ekf.hpp"
#include "ttrack/icp.hpp"
#include "ttrack/model.hpp"
#include "ttrack/sensor.hpp"

namespace ttrack {

enum class LoopMode { kClosedLoop, kOpenLoop };

struct ScenarioConfig {
  ModelSpec model;

  struct Truth {
    Vec4 mu0{0, 0, 0, 1};
    Vec3 omega0{0, 0, 0};
    Vec3 r_c0{10, 0, 0};
    Vec3 v_c0{0, 0, 0};
    Vec3 rho{-0.15, 0, 0};
    Vec4 eta{0, 0, 0, 1};
    Vec3 inertia{4, 8, 5};
    double dt = 0.01;          // truth integrator step
    double sigma_tau = 0.0;    // process disturbances injected into truth
    double sigma_f = 0.0;
  } truth;

  OrbitParams orbit;  // n = 0 by default (bench parity)

  struct Sensor {
    double rate_hz = 2.0;
    std::size_t points_per_scan = 500;
    double sigma_scan = 0.005;
    std::optional<Vec3> view_dir;  // fixed direction; unset = line of sight
    std::vector<std::pair<double, double>> faults;
  } sensor;

  struct Filter {
    NoiseConfig noise;
    Vec21 p0_diag = FilterState::default_initial_covariance().diagonal();
    // When set, the filter mean starts from these values instead of the
    // first measurement.
    std::optional<Vec4> init_mu;
    std::optional<Vec3> init_r_c;
    Vec3 init_omega{0, 0, 0};
    Vec3 init_p{0, 0, 0};
    Vec3 init_v_c{0, 0, 0};
    Vec3 init_rho{0, 0, 0};
    Vec4 init_eta{0, 0, 0, 1};
    // Bootstrap omega and v_c by differencing the first two refined poses.
    bool two_point_rate_init = true;
  } filter;

  struct Icp {
    std::optional<double> d_min;  // default (2 sigma_scan)^2
    int max_iter = 50;
    // Acquisition frames registered with the full 50-iteration budget
    // before the per-frame budget applies.
    int warmup_frames = 0;
    double init_rot_err_deg = 5.0;     // perturbation of the first seed pose
    double init_trans_err_frac = 0.02; // fraction of model radius
  } icp;

  LoopMode mode = LoopMode::kClosedLoop;
  double duration_s = 60.0;
  std::uint64_t seed = 1;

  double frame_period() const { return 1.0 / sensor.rate_hz; }
  double resolved_d_min() const {
    if (icp.d_min) return *icp.d_min;
    const double s2 = 2.0 * sensor.sigma_scan;
    return std::max(s2 * s2, 1e-18);
  }
};

struct FrameRow {
  double t = 0.0;
  Pose true_pose;
  Vec3 true_omega{0, 0, 0};
  bool meas_valid = false;
  Pose meas_pose;                // undefined when !meas_valid
  Pose seed_pose;                // ICP initialization used (when attempted)
  bool est_valid = false;        // filter initialized and alive
  Pose est_pose;                 // filter posterior pose of {C}
  Vec3 omega_hat{0, 0, 0};
  Vec3 p_hat{0, 0, 0};
  Vec3 rho_hat{0, 0, 0};
  Vec4 eta_hat{0, 0, 0, 1};
  double fit_normalized = 0.0;
  int icp_iterations = 0;
  bool icp_converged = false;
  double rot_err_rad = 0.0;      // geodesic angle, estimated vs true {C}
  double trans_err_m = 0.0;
};

struct TrackRecord {
  std::vector<FrameRow> rows;
  double divergence_time = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
};

// Optional filter-trace sink for run_scenario.
TrackRecord run_scenario(const ScenarioConfig& cfg,
                         std::vector<FilterTraceRow>* trace = nullptr);

struct Metrics {
  double mean_rot_err_rad = 0.0;
  double max_rot_err_rad = 0.0;
  double mean_trans_err_m = 0.0;
  double max_trans_err_m = 0.0;
  // first time each estimate error stays below its threshold for the
  // sustain window; NaN when never reached
  double p_converged_at = std::numeric_limits<double>::quiet_NaN();
  double rho_converged_at = std::numeric_limits<double>::quiet_NaN();
  double omega_converged_at = std::numeric_limits<double>::quiet_NaN();
  double blackout_recovery_s = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  double divergence_time = std::numeric_limits<double>::quiet_NaN();
};

struct MetricThresholds {
  double p_tol = 0.05;
  double rho_tol = 0.02;       // m
  double omega_tol = 0.01;     // rad/s
  double sustain_s = 20.0;
  double recovery_rot_rad = 2.0 * M_PI / 180.0;
  double recovery_trans_m = 0.05;
};

Metrics compute_metrics(const TrackRecord& rec, const ScenarioConfig& cfg,
                        const MetricThresholds& th = {});

void write_track_csv(const std::string& path, const TrackRecord& rec);

}  // namespace ttrack
