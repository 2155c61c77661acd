#include <doctest.h>

#include <cmath>

#include "ttrack/pipeline.hpp"

using namespace ttrack;

namespace {

ScenarioConfig static_scenario() {
  ScenarioConfig cfg;
  cfg.model.spacing = 0.04;
  cfg.truth.mu0 = Vec4(0.1, -0.2, 0.3, 0.9).normalized();
  cfg.truth.omega0 = Vec3::Zero();
  cfg.truth.r_c0 = Vec3(8, 1, -0.5);
  cfg.truth.v_c0 = Vec3::Zero();
  cfg.sensor.sigma_scan = 0.0;
  cfg.sensor.points_per_scan = 300;
  cfg.duration_s = 5.0;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("static noiseless target locks in within three frames") {
  const ScenarioConfig cfg = static_scenario();
  const TrackRecord rec = run_scenario(cfg);
  REQUIRE(rec.rows.size() == 10);
  CHECK_FALSE(rec.diverged);
  for (std::size_t k = 3; k < rec.rows.size(); ++k) {
    CHECK(rec.rows[k].est_valid);
    CHECK(rec.rows[k].rot_err_rad < 1e-6);
    CHECK(rec.rows[k].trans_err_m < 1e-6);
  }
}

TEST_CASE("mode isolation: identical seeds share the first measurement") {
  ScenarioConfig cl = static_scenario();
  cl.truth.omega0 = Vec3(0.03, 0.05, 0.02);
  cl.sensor.sigma_scan = 0.003;
  cl.duration_s = 3.0;
  ScenarioConfig ol = cl;
  cl.mode = LoopMode::kClosedLoop;
  ol.mode = LoopMode::kOpenLoop;

  const TrackRecord a = run_scenario(cl);
  const TrackRecord b = run_scenario(ol);
  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(a.rows[0].meas_valid);
  REQUIRE(b.rows[0].meas_valid);
  CHECK((a.rows[0].meas_pose.translation - b.rows[0].meas_pose.translation).norm() == 0.0);
  CHECK((a.rows[0].meas_pose.rotation.as_vec4() - b.rows[0].meas_pose.rotation.as_vec4())
            .norm() == 0.0);
  CHECK((a.rows[0].seed_pose.translation - b.rows[0].seed_pose.translation).norm() == 0.0);
  // truth streams are identical by construction
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK((a.rows[k].true_pose.translation - b.rows[k].true_pose.translation).norm() == 0.0);
    CHECK((a.rows[k].true_omega - b.rows[k].true_omega).norm() == 0.0);
  }
}

TEST_CASE("blackout: prediction-only frames, then reseed from the filter") {
  ScenarioConfig cfg = static_scenario();
  cfg.truth.omega0 = Vec3(0.04, 0.07, 0.02);
  cfg.sensor.sigma_scan = 0.003;
  cfg.duration_s = 30.0;
  cfg.sensor.faults = {{10.0, 15.0}};
  cfg.mode = LoopMode::kClosedLoop;

  std::vector<FilterTraceRow> trace;
  const TrackRecord rec = run_scenario(cfg, &trace);
  REQUIRE(rec.rows.size() == 60);
  REQUIRE(trace.size() == 60);

  std::size_t resume = 0;
  for (std::size_t k = 0; k < rec.rows.size(); ++k) {
    const bool in_window = rec.rows[k].t >= 10.0 && rec.rows[k].t < 15.0;
    CHECK(rec.rows[k].meas_valid == !in_window);
    if (in_window) {
      CHECK(rec.rows[k].est_valid);  // prediction keeps running
      resume = k + 1;
    }
  }
  REQUIRE(rec.rows[resume].meas_valid);

  // the ICP seed on resume equals the filter prediction propagated from
  // the last blackout step
  FilterState fs;
  fs.x = trace[resume - 1].x;
  const FilterState pred = ekf_propagate(fs, cfg.orbit, cfg.filter.noise, cfg.frame_period());
  const Pose expect = observed_pose(pred.x);
  CHECK((rec.rows[resume].seed_pose.translation - expect.translation).norm() < 1e-12);
  CHECK(geodesic_angle(rec.rows[resume].seed_pose.rotation, expect.rotation) < 1e-12);
}

TEST_CASE("constructed divergence is recorded, record completes") {
  ScenarioConfig cfg = static_scenario();
  cfg.duration_s = 10.0;
  cfg.sensor.sigma_scan = 0.001;
  // open loop keeps ICP healthy while the filter starts 92 m off with a
  // frozen position prior: the innovation must be explained through the
  // attitude error, which overflows the small-angle reset
  cfg.mode = LoopMode::kOpenLoop;
  cfg.filter.init_r_c = Vec3(100, 0, 0);
  cfg.filter.init_rho = Vec3(-0.15, 0, 0);
  Vec21 p0 = cfg.filter.p0_diag;
  p0.segment<3>(kDeltaRc).setConstant(1e-12);
  p0.segment<3>(kDeltaVc).setConstant(1e-12);
  p0.segment<3>(kDeltaMu).setConstant(25.0);
  cfg.filter.p0_diag = p0;
  NoiseConfig tight;
  tight.r = Mat6::Identity() * 1e-10;
  cfg.filter.noise = tight;

  const TrackRecord rec = run_scenario(cfg);
  CHECK(rec.diverged);
  CHECK(std::isfinite(rec.divergence_time));
  CHECK(rec.rows.size() == 20);  // completed despite the divergence
  // measurements keep flowing after the filter stops
  CHECK(rec.rows.back().meas_valid);
}

TEST_CASE("metrics on a hand-built record") {
  ScenarioConfig cfg = static_scenario();
  cfg.truth.inertia = Vec3(4, 8, 5);
  cfg.truth.rho = Vec3(-0.15, 0, 0);

  TrackRecord rec;
  const Vec3 p_true(0.75, 0.125, -0.8);
  for (int k = 0; k < 5; ++k) {
    FrameRow row;
    row.t = k * 1.0;
    row.est_valid = true;
    row.rot_err_rad = 0.01 * (k + 1);
    row.trans_err_m = 0.002;
    row.p_hat = (k >= 2) ? p_true : Vec3::Zero();
    row.rho_hat = cfg.truth.rho;
    row.omega_hat = row.true_omega = Vec3(0.1, 0, 0);
    rec.rows.push_back(row);
  }

  MetricThresholds th;
  th.sustain_s = 2.0;
  const Metrics m = compute_metrics(rec, cfg, th);
  CHECK(m.mean_rot_err_rad == doctest::Approx(0.01 * (1 + 2 + 3 + 4 + 5) / 5.0));
  CHECK(m.max_rot_err_rad == doctest::Approx(0.05));
  CHECK(m.mean_trans_err_m == doctest::Approx(0.002));
  CHECK(m.p_converged_at == doctest::Approx(2.0));
  CHECK(m.rho_converged_at == doctest::Approx(0.0));
  CHECK(m.omega_converged_at == doctest::Approx(0.0));
  CHECK_FALSE(m.diverged);

  // perfect track has zero error
  TrackRecord perfect;
  for (int k = 0; k < 3; ++k) {
    FrameRow row;
    row.t = k;
    row.est_valid = true;
    row.p_hat = p_true;
    row.rho_hat = cfg.truth.rho;
    perfect.rows.push_back(row);
  }
  MetricThresholds th2;
  th2.sustain_s = 1.0;
  const Metrics mp = compute_metrics(perfect, cfg, th2);
  CHECK(mp.mean_rot_err_rad == 0.0);
  CHECK(mp.max_trans_err_m == 0.0);
}

}  // TEST_SUITE
