#include "ttrack/config.hpp"

#include <fstream>

namespace ttrack {

using nlohmann::json;

namespace {

Vec3 vec3_of(const json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw Error(std::string("config: ") + key + " must be a 3-array");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

Vec4 vec4_of(const json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 4) throw Error(std::string("config: ") + key + " must be a 4-array");
  return Vec4(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>());
}

json arr(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }
json arr(const Vec4& v) { return json::array({v(0), v(1), v(2), v(3)}); }

template <typename T, typename U>
void maybe(const json& j, const char* key, U& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig cfg;

  if (j.contains("model")) {
    const auto& m = j.at("model");
    maybe<std::string>(m, "shape", cfg.model.shape);
    maybe<double>(m, "scale", cfg.model.scale);
    maybe<double>(m, "spacing", cfg.model.spacing);
  }

  if (j.contains("truth")) {
    const auto& t = j.at("truth");
    if (t.contains("mu0")) cfg.truth.mu0 = vec4_of(t, "mu0");
    if (t.contains("omega0")) cfg.truth.omega0 = vec3_of(t, "omega0");
    if (t.contains("r_c0")) cfg.truth.r_c0 = vec3_of(t, "r_c0");
    if (t.contains("v_c0")) cfg.truth.v_c0 = vec3_of(t, "v_c0");
    if (t.contains("rho")) cfg.truth.rho = vec3_of(t, "rho");
    if (t.contains("eta")) cfg.truth.eta = vec4_of(t, "eta");
    if (t.contains("inertia")) cfg.truth.inertia = vec3_of(t, "inertia");
    maybe<double>(t, "dt", cfg.truth.dt);
    maybe<double>(t, "sigma_tau", cfg.truth.sigma_tau);
    maybe<double>(t, "sigma_f", cfg.truth.sigma_f);
  }

  if (j.contains("orbit")) {
    const auto& o = j.at("orbit");
    maybe<double>(o, "n", cfg.orbit.n);
    maybe<double>(o, "mu_earth", cfg.orbit.mu_earth);
  }

  if (j.contains("sensor")) {
    const auto& s = j.at("sensor");
    maybe<double>(s, "rate_hz", cfg.sensor.rate_hz);
    maybe<std::size_t>(s, "points_per_scan", cfg.sensor.points_per_scan);
    maybe<double>(s, "sigma_scan", cfg.sensor.sigma_scan);
    if (s.contains("view_dir")) cfg.sensor.view_dir = vec3_of(s, "view_dir");
    if (s.contains("faults")) {
      for (const auto& w : s.at("faults")) {
        if (!w.is_array() || w.size() != 2) throw Error("config: fault windows are [start,end] pairs");
        cfg.sensor.faults.emplace_back(w[0].get<double>(), w[1].get<double>());
      }
    }
  }

  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    maybe<double>(f, "sigma_tau", cfg.filter.noise.sigma_tau);
    maybe<double>(f, "sigma_f", cfg.filter.noise.sigma_f);
    if (f.contains("r_pos_sigma") || f.contains("r_att_sigma")) {
      double rp = 0.01, ra = 0.005;
      maybe<double>(f, "r_pos_sigma", rp);
      maybe<double>(f, "r_att_sigma", ra);
      Vec6 d;
      d << rp * rp, rp * rp, rp * rp, ra * ra, ra * ra, ra * ra;
      cfg.filter.noise.r = d.asDiagonal();
    }
    if (f.contains("p0_sigma")) {
      // seven per-block standard deviations, in error-state block order
      const auto& a = f.at("p0_sigma");
      if (!a.is_array() || a.size() != 7) throw Error("config: p0_sigma must be a 7-array");
      for (int blk = 0; blk < 7; ++blk) {
        const double sd = a[blk].get<double>();
        cfg.filter.p0_diag.segment<3>(3 * blk).setConstant(sd * sd);
      }
    }
    maybe<bool>(f, "two_point_rate_init", cfg.filter.two_point_rate_init);
    if (f.contains("init_mu")) cfg.filter.init_mu = vec4_of(f, "init_mu");
    if (f.contains("init_r_c")) cfg.filter.init_r_c = vec3_of(f, "init_r_c");
    if (f.contains("init_omega")) cfg.filter.init_omega = vec3_of(f, "init_omega");
    if (f.contains("init_p")) cfg.filter.init_p = vec3_of(f, "init_p");
    if (f.contains("init_v_c")) cfg.filter.init_v_c = vec3_of(f, "init_v_c");
    if (f.contains("init_rho")) cfg.filter.init_rho = vec3_of(f, "init_rho");
    if (f.contains("init_eta")) cfg.filter.init_eta = vec4_of(f, "init_eta");
  }

  if (j.contains("icp")) {
    const auto& i = j.at("icp");
    if (i.contains("d_min") && !i.at("d_min").is_null())
      cfg.icp.d_min = i.at("d_min").get<double>();
    maybe<int>(i, "max_iter", cfg.icp.max_iter);
    maybe<int>(i, "warmup_frames", cfg.icp.warmup_frames);
    maybe<double>(i, "init_rot_err_deg", cfg.icp.init_rot_err_deg);
    maybe<double>(i, "init_trans_err_frac", cfg.icp.init_trans_err_frac);
  }

  if (j.contains("mode")) {
    const std::string m = j.at("mode").get<std::string>();
    if (m == "cl") cfg.mode = LoopMode::kClosedLoop;
    else if (m == "ol") cfg.mode = LoopMode::kOpenLoop;
    else throw Error("config: mode must be \"cl\" or \"ol\"");
  }
  maybe<double>(j, "duration_s", cfg.duration_s);
  maybe<std::uint64_t>(j, "seed", cfg.seed);

  if (cfg.sensor.rate_hz <= 0.0) throw Error("config: sensor.rate_hz must be positive");
  if (cfg.duration_s <= 0.0) throw Error("config: duration_s must be positive");
  if (cfg.sensor.points_per_scan < 3) throw Error("config: points_per_scan must be >= 3");
  return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["model"] = {{"shape", cfg.model.shape}, {"scale", cfg.model.scale}, {"spacing", cfg.model.spacing}};
  j["truth"] = {
      {"mu0", arr(cfg.truth.mu0)},       {"omega0", arr(cfg.truth.omega0)},
      {"r_c0", arr(cfg.truth.r_c0)},     {"v_c0", arr(cfg.truth.v_c0)},
      {"rho", arr(cfg.truth.rho)},       {"eta", arr(cfg.truth.eta)},
      {"inertia", arr(cfg.truth.inertia)}, {"dt", cfg.truth.dt},
      {"sigma_tau", cfg.truth.sigma_tau}, {"sigma_f", cfg.truth.sigma_f}};
  j["orbit"] = {{"n", cfg.orbit.n}, {"mu_earth", cfg.orbit.mu_earth}};
  json faults = json::array();
  for (const auto& [a, b] : cfg.sensor.faults) faults.push_back(json::array({a, b}));
  j["sensor"] = {{"rate_hz", cfg.sensor.rate_hz},
                 {"points_per_scan", cfg.sensor.points_per_scan},
                 {"sigma_scan", cfg.sensor.sigma_scan},
                 {"faults", faults}};
  if (cfg.sensor.view_dir) j["sensor"]["view_dir"] = arr(*cfg.sensor.view_dir);

  json f;
  f["sigma_tau"] = cfg.filter.noise.sigma_tau;
  f["sigma_f"] = cfg.filter.noise.sigma_f;
  f["r_pos_sigma"] = std::sqrt(cfg.filter.noise.r(0, 0));
  f["r_att_sigma"] = std::sqrt(cfg.filter.noise.r(3, 3));
  json p0 = json::array();
  for (int blk = 0; blk < 7; ++blk) p0.push_back(std::sqrt(cfg.filter.p0_diag(3 * blk)));
  f["p0_sigma"] = p0;
  f["two_point_rate_init"] = cfg.filter.two_point_rate_init;
  if (cfg.filter.init_mu) f["init_mu"] = arr(*cfg.filter.init_mu);
  if (cfg.filter.init_r_c) f["init_r_c"] = arr(*cfg.filter.init_r_c);
  f["init_omega"] = arr(cfg.filter.init_omega);
  f["init_p"] = arr(cfg.filter.init_p);
  f["init_v_c"] = arr(cfg.filter.init_v_c);
  f["init_rho"] = arr(cfg.filter.init_rho);
  f["init_eta"] = arr(cfg.filter.init_eta);
  j["filter"] = f;

  j["icp"] = {{"d_min", cfg.resolved_d_min()},
              {"max_iter", cfg.icp.max_iter},
              {"warmup_frames", cfg.icp.warmup_frames},
              {"init_rot_err_deg", cfg.icp.init_rot_err_deg},
              {"init_trans_err_frac", cfg.icp.init_trans_err_frac}};
  j["mode"] = cfg.mode == LoopMode::kClosedLoop ? "cl" : "ol";
  j["duration_s"] = cfg.duration_s;
  j["seed"] = cfg.seed;
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config parse error in " + path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw Error("config schema error in " + path + ": " + e.what());
  }
}

}  // namespace ttrack
