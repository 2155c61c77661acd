#include "ttrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "ttrack/rng.hpp"

namespace ttrack {

namespace {

Pose perturb_pose(const Pose& pose, double rot_err_rad, double trans_err_m, RngStream& rng) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  if (axis.norm() == 0.0) axis = Vec3(1, 0, 0);
  Vec3 dir(rng.normal(), rng.normal(), rng.normal());
  if (dir.norm() == 0.0) dir = Vec3(1, 0, 0);
  Pose out;
  out.rotation = qmul_otimes(pose.rotation,
                             UnitQuaternion::from_axis_angle(axis, rot_err_rad));
  out.translation = pose.translation + trans_err_m * dir.normalized();
  return out;
}

}  // namespace

TrackRecord run_scenario(const ScenarioConfig& cfg, std::vector<FilterTraceRow>* trace) {
  if (cfg.sensor.rate_hz <= 0.0) throw Error("run_scenario: rate must be positive");
  if (cfg.duration_s <= 0.0) throw Error("run_scenario: duration must be positive");

  const SurfaceModel model(generate_model_points(cfg.model));
  const FaultSchedule faults(cfg.sensor.faults);
  const double T = cfg.frame_period();
  const long n_frames = std::lround(cfg.duration_s * cfg.sensor.rate_hz);

  TargetTruth truth;
  truth.mu = UnitQuaternion::from_vec4(cfg.truth.mu0);
  truth.omega = cfg.truth.omega0;
  truth.r_c = cfg.truth.r_c0;
  truth.v_c = cfg.truth.v_c0;
  truth.rho = cfg.truth.rho;
  truth.eta = UnitQuaternion::from_vec4(cfg.truth.eta);
  truth.inertia = cfg.truth.inertia;

  RngStream truth_rng(cfg.seed, "truth-noise");
  TruthNoise truth_noise{cfg.truth.sigma_tau, cfg.truth.sigma_f, &truth_rng};
  const bool with_truth_noise = cfg.truth.sigma_tau > 0.0 || cfg.truth.sigma_f > 0.0;

  RngStream guess_rng(cfg.seed, "init-guess");
  const Pose initial_guess =
      perturb_pose(observed_pose(truth), cfg.icp.init_rot_err_deg * M_PI / 180.0,
                   cfg.icp.init_trans_err_frac * model.characteristic_radius(), guess_rng);

  IcpOptions icp_opts;
  icp_opts.d_min = cfg.resolved_d_min();
  icp_opts.max_iter = cfg.icp.max_iter;

  FilterState fs;
  bool filter_ready = false;
  bool filter_alive = true;
  bool rate_initialized = !cfg.filter.two_point_rate_init;
  std::optional<Measurement> first_meas;
  Pose ol_prev = initial_guess;

  TrackRecord rec;
  rec.rows.reserve(n_frames);

  for (long k = 0; k < n_frames; ++k) {
    const double t_k = static_cast<double>(k) * T;
    if (k > 0)
      truth = integrate_truth(truth, cfg.orbit, T, cfg.truth.dt,
                              with_truth_noise ? &truth_noise : nullptr);

    FrameRow row;
    row.t = t_k;
    row.true_pose = observed_pose(truth);
    row.true_omega = truth.omega;

    const Vec3 view_dir = cfg.sensor.view_dir
                              ? *cfg.sensor.view_dir
                              : (row.true_pose.translation.norm() > 0.0
                                     ? Vec3(row.true_pose.translation.normalized())
                                     : Vec3(1, 0, 0));
    const std::uint64_t scan_seed = RngStream(cfg.seed, "scan", k).next_u64();
    ScanFrame frame = sample_scan(model, row.true_pose, cfg.sensor.points_per_scan,
                                  cfg.sensor.sigma_scan, scan_seed, view_dir);
    frame.t = t_k;
    frame = apply_faults(t_k, frame, faults);

    FilterTraceRow trace_row;
    trace_row.t = t_k;

    if (frame.valid) {
      Pose seed;
      if (k == 0 || (!filter_ready && cfg.mode == LoopMode::kClosedLoop)) {
        seed = (cfg.mode == LoopMode::kOpenLoop) ? ol_prev : initial_guess;
      } else if (cfg.mode == LoopMode::kClosedLoop && filter_alive) {
        seed = observed_pose(fs.x);  // propagated prediction for t_k
      } else {
        seed = ol_prev;
      }
      row.seed_pose = seed;

      bool measured = false;
      try {
        IcpOptions frame_opts = icp_opts;
        if (k < cfg.icp.warmup_frames) frame_opts.max_iter = std::max(icp_opts.max_iter, 50);
        const IcpResult icp = icp_register(frame.cloud, model, seed, frame_opts);
        row.meas_valid = true;
        row.meas_pose = icp.pose;
        row.fit_normalized = icp.fit_normalized;
        row.icp_iterations = icp.iterations;
        row.icp_converged = icp.converged;
        ol_prev = icp.pose;
        measured = true;
      } catch (const AlignmentAmbiguous&) {
        // degenerate geometry this frame; fall through to prediction only
      }

      if (measured && filter_alive) {
        const Measurement meas{row.meas_pose.translation, row.meas_pose.rotation, t_k};
        if (!filter_ready) {
          fs.x.mu = cfg.filter.init_mu ? UnitQuaternion::from_vec4(*cfg.filter.init_mu)
                                       : meas.q;
          fs.x.eta = UnitQuaternion::from_vec4(cfg.filter.init_eta);
          fs.x.rho = cfg.filter.init_rho;
          fs.x.omega = cfg.filter.init_omega;
          fs.x.p = cfg.filter.init_p;
          fs.x.v_c = cfg.filter.init_v_c;
          fs.x.r_c = cfg.filter.init_r_c
                         ? *cfg.filter.init_r_c
                         : Vec3(meas.r - to_rotation(fs.x.mu) * fs.x.rho);
          fs.p = cfg.filter.p0_diag.asDiagonal();
          fs.t = t_k;
          filter_ready = true;
          first_meas = meas;
        } else {
          if (!rate_initialized && first_meas) {
            const double dt_meas = meas.t - first_meas->t;
            if (dt_meas > 0.0) {
              // two-point bootstrap: body rate from the attitude increment,
              // velocity from the position increment
              const UnitQuaternion mu_prev =
                  qmul_otimes(conjugate(fs.x.eta), first_meas->q);
              const UnitQuaternion mu_now = qmul_otimes(conjugate(fs.x.eta), meas.q);
              const UnitQuaternion step = qmul_circledast(conjugate(mu_prev), mu_now);
              const double vec_norm = step.vec().norm();
              if (vec_norm > 0.0) {
                const double angle = 2.0 * std::atan2(vec_norm, std::abs(step.scalar()));
                Vec3 axis = step.vec() / vec_norm;
                if (step.scalar() < 0.0) axis = -axis;
                fs.x.omega = axis * (angle / dt_meas);
              }
              fs.x.v_c = (meas.r - first_meas->r) / dt_meas;
            }
            rate_initialized = true;
          }
          try {
            trace_row.innovation = innovation(meas, fs);
            const PredictedMeasurement pm = predict_measurement(fs);
            trace_row.innovation_cov_diag =
                (pm.h * fs.p * pm.h.transpose() + cfg.filter.noise.r).diagonal();
            fs = ekf_correct(fs, meas, cfg.filter.noise);
            trace_row.corrected = true;
          } catch (const MeasurementRejected&) {
            // leave the prior in place this frame
          } catch (const FilterDivergence& e) {
            rec.diverged = true;
            rec.divergence_time = e.t;
            filter_alive = false;
          }
        }
      }
    }

    if (filter_ready) {
      row.est_valid = filter_alive;
      row.est_pose = observed_pose(fs.x);
      row.omega_hat = fs.x.omega;
      row.p_hat = fs.x.p;
      row.rho_hat = fs.x.rho;
      row.eta_hat = fs.x.eta.as_vec4();
      row.rot_err_rad = geodesic_angle(row.est_pose.rotation, row.true_pose.rotation);
      row.trans_err_m = (row.est_pose.translation - row.true_pose.translation).norm();
    }
    rec.rows.push_back(row);

    if (trace) {
      trace_row.x = fs.x;
      trace_row.p_diag = fs.p.diagonal();
      trace->push_back(trace_row);
    }

    if (filter_ready && filter_alive) fs = ekf_propagate(fs, cfg.orbit, cfg.filter.noise, T);
  }
  return rec;
}

namespace {

// first t0 such that ok(row) holds for every row in [t0, t0 + sustain]
double first_sustained(const TrackRecord& rec, double sustain,
                       const std::function<bool(const FrameRow&)>& ok) {
  const auto& rows = rec.rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!ok(rows[i])) continue;
    bool held = true;
    std::size_t j = i;
    for (; j < rows.size() && rows[j].t <= rows[i].t + sustain; ++j) {
      if (!ok(rows[j])) {
        held = false;
        break;
      }
    }
    // the window must actually span the sustain length
    if (held && !rows.empty() && rows.back().t >= rows[i].t + sustain - 1e-9) return rows[i].t;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Metrics compute_metrics(const TrackRecord& rec, const ScenarioConfig& cfg,
                        const MetricThresholds& th) {
  Metrics m;
  m.diverged = rec.diverged;
  m.divergence_time = rec.divergence_time;

  std::size_t n = 0;
  for (const auto& row : rec.rows) {
    if (!row.est_valid) continue;
    ++n;
    m.mean_rot_err_rad += row.rot_err_rad;
    m.mean_trans_err_m += row.trans_err_m;
    m.max_rot_err_rad = std::max(m.max_rot_err_rad, row.rot_err_rad);
    m.max_trans_err_m = std::max(m.max_trans_err_m, row.trans_err_m);
  }
  if (n > 0) {
    m.mean_rot_err_rad /= static_cast<double>(n);
    m.mean_trans_err_m /= static_cast<double>(n);
  }

  const Vec3 p_true = inertia_to_ratios(cfg.truth.inertia).as_vec3();
  m.p_converged_at = first_sustained(rec, th.sustain_s, [&](const FrameRow& r) {
    return r.est_valid && (r.p_hat - p_true).cwiseAbs().maxCoeff() < th.p_tol;
  });
  m.rho_converged_at = first_sustained(rec, th.sustain_s, [&](const FrameRow& r) {
    return r.est_valid && (r.rho_hat - cfg.truth.rho).norm() < th.rho_tol;
  });
  m.omega_converged_at = first_sustained(rec, th.sustain_s, [&](const FrameRow& r) {
    return r.est_valid && (r.omega_hat - r.true_omega).norm() < th.omega_tol;
  });

  if (!cfg.sensor.faults.empty()) {
    const double end = cfg.sensor.faults.front().second;
    for (const auto& row : rec.rows) {
      if (row.t < end || !row.est_valid) continue;
      if (row.rot_err_rad < th.recovery_rot_rad && row.trans_err_m < th.recovery_trans_m) {
        m.blackout_recovery_s = row.t - end;
        break;
      }
    }
  }
  return m;
}

void write_track_csv(const std::string& path, const TrackRecord& rec) {
  std::ofstream out(path);
  if (!out) throw Error("write_track_csv: cannot open " + path);
  out << "t,true_qx,true_qy,true_qz,true_qo,true_rx,true_ry,true_rz,"
         "true_wx,true_wy,true_wz,"
         "meas_valid,meas_qx,meas_qy,meas_qz,meas_qo,meas_rx,meas_ry,meas_rz,"
         "seed_qx,seed_qy,seed_qz,seed_qo,seed_rx,seed_ry,seed_rz,"
         "est_valid,est_qx,est_qy,est_qz,est_qo,est_rx,est_ry,est_rz,"
         "omega_hat_x,omega_hat_y,omega_hat_z,p_hat_x,p_hat_y,p_hat_z,"
         "rho_hat_x,rho_hat_y,rho_hat_z,eta_hat_x,eta_hat_y,eta_hat_z,eta_hat_o,"
         "fit_normalized,icp_iterations,icp_converged,rot_err_rad,trans_err_m\n";
  char buf[40];
  auto put = [&](double x, char sep) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf << sep;
  };
  auto put_pose = [&](const Pose& p) {
    const Vec4 q = p.rotation.as_vec4();
    for (int i = 0; i < 4; ++i) put(q(i), ',');
    for (int i = 0; i < 3; ++i) put(p.translation(i), ',');
  };
  for (const auto& r : rec.rows) {
    put(r.t, ',');
    put_pose(r.true_pose);
    for (int i = 0; i < 3; ++i) put(r.true_omega(i), ',');
    out << (r.meas_valid ? 1 : 0) << ',';
    put_pose(r.meas_pose);
    put_pose(r.seed_pose);
    out << (r.est_valid ? 1 : 0) << ',';
    put_pose(r.est_pose);
    for (int i = 0; i < 3; ++i) put(r.omega_hat(i), ',');
    for (int i = 0; i < 3; ++i) put(r.p_hat(i), ',');
    for (int i = 0; i < 3; ++i) put(r.rho_hat(i), ',');
    for (int i = 0; i < 4; ++i) put(r.eta_hat(i), ',');
    put(r.fit_normalized, ',');
    out << r.icp_iterations << ',' << (r.icp_converged ? 1 : 0) << ',';
    put(r.rot_err_rad, ',');
    put(r.trans_err_m, '\n');
  }
}

}  // namespace ttrack
