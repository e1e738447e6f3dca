#include "relnav/harness/scenario.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace relnav::harness {

using nlohmann::json;

namespace {

Vec3 to_vec3(const json& j, const std::string& path,
             std::vector<std::string>& errors) {
  if (!j.is_array() || j.size() != 3) {
    errors.push_back(path + ": expected an array of 3 numbers");
    return Vec3::Zero();
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec4 to_vec4(const json& j, const std::string& path,
             std::vector<std::string>& errors) {
  if (!j.is_array() || j.size() != 4) {
    errors.push_back(path + ": expected an array of 4 numbers");
    return Vec4::Zero();
  }
  return Vec4(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
              j[3].get<double>());
}

void require(bool ok, const std::string& message,
             std::vector<std::string>& errors) {
  if (!ok) errors.push_back(message);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario parse error: ") + e.what());
  }

  std::vector<std::string> errors;
  ScenarioConfig cfg;

  cfg.name = j.value("name", std::string("unnamed"));
  cfg.schema_version = j.value("schema_version", 1);
  require(cfg.schema_version == 1, "schema_version: only version 1 is known",
          errors);
  cfg.duration_s = j.value("duration_s", 60.0);
  require(cfg.duration_s > 0.0, "duration_s: must be > 0", errors);
  cfg.seed = j.value("seed", 1ULL);

  if (j.contains("rates")) {
    const auto& r = j["rates"];
    auto& rates = cfg.mission.rates;
    rates.plant_rate = r.value("plant", rates.plant_rate);
    rates.control_rate = r.value("control", rates.control_rate);
    rates.cbf_rate = r.value("cbf", rates.cbf_rate);
    rates.detector_rate = r.value("detector", rates.detector_rate);
    rates.baro_rate = r.value("baro", rates.baro_rate);
    rates.velocity_rate = r.value("velocity", rates.velocity_rate);
    require(rates.plant_rate > 0 && rates.control_rate > 0,
            "rates: plant and control rates must be > 0", errors);
  }

  if (j.contains("vehicle")) {
    const auto& v = j["vehicle"];
    auto& p = cfg.vehicle;
    p.mass = v.value("mass", p.mass);
    if (v.contains("inertia")) p.inertia_diag = to_vec3(v["inertia"], "vehicle.inertia", errors);
    p.arm_length = v.value("arm_length", p.arm_length);
    p.thrust_to_weight = v.value("thrust_to_weight", p.thrust_to_weight);
    p.torque_coeff = v.value("torque_coeff", p.torque_coeff);
    p.min_thrust = v.value("min_thrust", p.min_thrust);
    p.max_thrust = v.value("max_thrust", p.max_thrust);
    p.drag_coeff = v.value("drag_coeff", p.drag_coeff);
    require(p.mass > 0.0, "vehicle.mass: must be > 0", errors);
    require(std::abs(4.0 * p.max_thrust / (p.mass * kGravity) -
                     p.thrust_to_weight) < 1e-6,
            "vehicle.max_thrust: 4*max_thrust/(mass*g) must equal "
            "vehicle.thrust_to_weight",
            errors);
  }

  if (j.contains("start")) {
    const auto& s = j["start"];
    if (s.contains("position")) cfg.start.position = to_vec3(s["position"], "start.position", errors);
    if (s.contains("velocity")) cfg.start.velocity = to_vec3(s["velocity"], "start.velocity", errors);
    cfg.start.attitude = yaw_to_quaternion(s.value("yaw", 0.0));
  }

  if (j.contains("environment")) {
    const auto& e = j["environment"];
    cfg.environment.ground_z = e.value("ground_z", 0.0);
    if (e.contains("spheres")) {
      int i = 0;
      for (const auto& s : e["spheres"]) {
        plant::Sphere sp;
        sp.center = to_vec3(s.at("center"), "environment.spheres[" + std::to_string(i) + "].center", errors);
        sp.radius = s.value("radius", 1.0);
        require(sp.radius > 0.0,
                "environment.spheres[" + std::to_string(i) + "].radius: must be > 0",
                errors);
        cfg.environment.spheres.push_back(sp);
        ++i;
      }
    }
    if (e.contains("cylinders")) {
      int i = 0;
      for (const auto& c : e["cylinders"]) {
        plant::Cylinder cy;
        cy.base = to_vec3(c.at("base"), "environment.cylinders[" + std::to_string(i) + "].base", errors);
        cy.radius = c.value("radius", 0.2);
        cy.height = c.value("height", 10.0);
        require(cy.radius > 0.0,
                "environment.cylinders[" + std::to_string(i) + "].radius: must be > 0",
                errors);
        cfg.environment.cylinders.push_back(cy);
        ++i;
      }
    }
    if (e.contains("target")) {
      const auto& t = e["target"];
      auto& tg = cfg.environment.target;
      if (t.contains("position")) tg.position = to_vec3(t["position"], "environment.target.position", errors);
      if (t.contains("velocity")) tg.velocity = to_vec3(t["velocity"], "environment.target.velocity", errors);
      const std::string motion = t.value("motion", std::string("static"));
      if (motion == "static") {
        tg.motion = plant::TargetMotion::Static;
      } else if (motion == "constant_velocity") {
        tg.motion = plant::TargetMotion::ConstantVelocity;
      } else if (motion == "waypoints") {
        tg.motion = plant::TargetMotion::Waypoints;
      } else {
        errors.push_back("environment.target.motion: unknown value '" + motion + "'");
      }
      if (t.contains("waypoints")) {
        int i = 0;
        for (const auto& w : t["waypoints"]) {
          tg.waypoints.push_back(to_vec3(w, "environment.target.waypoints[" + std::to_string(i) + "]", errors));
          ++i;
        }
      }
      tg.speed = t.value("speed", 0.0);
      tg.visual_size = t.value("visual_size", 0.5);
      require(tg.motion != plant::TargetMotion::Waypoints || !tg.waypoints.empty(),
              "environment.target.waypoints: must be non-empty for waypoint motion",
              errors);
    }
  }

  if (j.contains("sensors")) {
    const auto& s = j["sensors"];
    auto& su = cfg.sensors;
    su.accel_noise_density = s.value("accel_noise_density", su.accel_noise_density);
    su.gyro_noise_density = s.value("gyro_noise_density", su.gyro_noise_density);
    su.accel_bias_walk = s.value("accel_bias_walk", su.accel_bias_walk);
    su.gyro_bias_walk = s.value("gyro_bias_walk", su.gyro_bias_walk);
    if (s.contains("accel_bias0")) su.accel_bias0 = to_vec3(s["accel_bias0"], "sensors.accel_bias0", errors);
    if (s.contains("gyro_bias0")) su.gyro_bias0 = to_vec3(s["gyro_bias0"], "sensors.gyro_bias0", errors);
    su.baro_sigma = s.value("baro_sigma", su.baro_sigma);
    su.baro_bias_walk = s.value("baro_bias_walk", su.baro_bias_walk);
    su.baro_bias0 = s.value("baro_bias0", su.baro_bias0);
    su.velocity_sigma = s.value("velocity_sigma", su.velocity_sigma);
    su.velocity_dropout = s.value("velocity_dropout", su.velocity_dropout);
    require(su.accel_noise_density >= 0 && su.gyro_noise_density >= 0 &&
                su.baro_sigma >= 0 && su.velocity_sigma >= 0,
            "sensors: noise magnitudes must be >= 0", errors);
    require(su.velocity_dropout >= 0.0 && su.velocity_dropout <= 1.0,
            "sensors.velocity_dropout: must be in [0, 1]", errors);
    if (s.contains("camera")) {
      const auto& c = s["camera"];
      auto& cam = su.camera;
      cam.width = c.value("width", cam.width);
      cam.height = c.value("height", cam.height);
      cam.hfov = c.value("hfov", cam.hfov);
      cam.max_range = c.value("max_range", cam.max_range);
      if (c.contains("lever_arm")) cam.lever_arm = to_vec3(c["lever_arm"], "sensors.camera.lever_arm", errors);
      const std::string mount = c.value("mount", std::string("forward"));
      if (mount == "forward") {
        cam.mount = CameraMount::Forward;
      } else if (mount == "down45") {
        cam.mount = CameraMount::Down45;
      } else {
        errors.push_back("sensors.camera.mount: unknown value '" + mount + "'");
      }
      require(cam.hfov > 0.0 && cam.hfov < M_PI,
              "sensors.camera.hfov: must be in (0, pi)", errors);
      require(cam.width > 0 && cam.height > 0,
              "sensors.camera: width and height must be > 0", errors);
    }
    if (s.contains("detector")) {
      const auto& d = s["detector"];
      su.detector_max_range = d.value("max_range", su.detector_max_range);
      su.detector_c_max = d.value("c_max", su.detector_c_max);
      su.detector_sigma = d.value("sigma", su.detector_sigma);
      require(su.detector_sigma >= 0.0, "sensors.detector.sigma: must be >= 0", errors);
      require(su.detector_c_max > 0.0 && su.detector_c_max <= 1.0,
              "sensors.detector.c_max: must be in (0, 1]", errors);
    }
  }
  cfg.sensors.seed = cfg.seed;
  cfg.sensors.imu_rate = cfg.mission.rates.control_rate;
  cfg.sensors.baro_rate = cfg.mission.rates.baro_rate;
  cfg.sensors.velocity_rate = cfg.mission.rates.velocity_rate;
  cfg.sensors.depth_rate = cfg.mission.rates.cbf_rate;
  cfg.sensors.detector_rate = cfg.mission.rates.detector_rate;

  if (j.contains("loiter")) {
    const auto& l = j["loiter"];
    auto& lp = cfg.mission.loiter;
    lp.p_z_loiter = l.value("p_z", lp.p_z_loiter);
    lp.v_loiter = l.value("v", lp.v_loiter);
    lp.psi0 = l.value("psi0", lp.psi0);
    lp.bias_gain = l.value("bias_gain", lp.bias_gain);
    lp.bias_clamp = l.value("bias_clamp", lp.bias_clamp);
    const std::string pol = l.value("psi_policy", std::string("fixed"));
    if (pol == "fixed") {
      lp.psi_policy = reference::HeadingPolicy::Fixed;
    } else if (pol == "detection_biased") {
      lp.psi_policy = reference::HeadingPolicy::DetectionBiased;
    } else if (pol == "free_space") {
      lp.psi_policy = reference::HeadingPolicy::FreeSpace;
    } else {
      errors.push_back("loiter.psi_policy: unknown value '" + pol + "'");
    }
    require(lp.v_loiter >= 0.0, "loiter.v: must be >= 0", errors);
    require(lp.bias_clamp > 0.0 && lp.bias_clamp <= M_PI / 2.0,
            "loiter.bias_clamp: must be in (0, pi/2]", errors);
  }

  if (j.contains("track")) {
    const auto& t = j["track"];
    auto& tp = cfg.mission.track;
    tp.d_xy_track = t.value("d_xy", tp.d_xy_track);
    tp.d_z_track = t.value("d_z", tp.d_z_track);
    require(tp.d_xy_track > 0.0, "track.d_xy: must be > 0", errors);
  }

  if (j.contains("mode_switch")) {
    const auto& m = j["mode_switch"];
    auto& ms = cfg.mission.mode_switch;
    ms.tau_up = m.value("tau_up", ms.tau_up);
    ms.tau_down = m.value("tau_down", ms.tau_down);
    ms.min_dwell_s = m.value("min_dwell_s", ms.min_dwell_s);
    require(ms.tau_up < ms.tau_down,
            "mode_switch.tau_up: must be < mode_switch.tau_down", errors);
    require(ms.min_dwell_s >= 0.0, "mode_switch.min_dwell_s: must be >= 0", errors);
  }

  {
    // UKF noise defaults derive from the simulated sensors; explicit values
    // in the file win (model-mismatch studies).
    auto& u = cfg.mission.ukf;
    const auto& su = cfg.sensors;
    u.psd_vel = su.accel_noise_density * su.accel_noise_density;
    u.psd_att = su.gyro_noise_density * su.gyro_noise_density;
    u.psd_ba = su.accel_bias_walk * su.accel_bias_walk;
    u.psd_bg = su.gyro_bias_walk * su.gyro_bias_walk;
    u.psd_bp = su.baro_bias_walk * su.baro_bias_walk;
    u.r_baro = su.baro_sigma * su.baro_sigma;
    u.r_vel = su.velocity_sigma * su.velocity_sigma;
    u.r_det = su.detector_sigma * su.detector_sigma;
    u.init_cov_diag << 0.01, 0.01, 0.04, 0.01, 0.01, 0.01, 1e-4, 1e-4, 1e-4,
        0.25, 1e-2, 1e-2, 1e-2, 1e-6, 1e-6, 1e-6;
    if (j.contains("ukf")) {
      const auto& uj = j["ukf"];
      u.alpha = uj.value("alpha", u.alpha);
      u.beta = uj.value("beta", u.beta);
      u.kappa = uj.value("kappa", u.kappa);
      u.psd_pos = uj.value("psd_pos", u.psd_pos);
      u.psd_vel = uj.value("psd_vel", u.psd_vel);
      u.psd_att = uj.value("psd_att", u.psd_att);
      u.psd_bp = uj.value("psd_bp", u.psd_bp);
      u.psd_ba = uj.value("psd_ba", u.psd_ba);
      u.psd_bg = uj.value("psd_bg", u.psd_bg);
      u.psd_vel_track = uj.value("psd_vel_track", u.psd_vel_track);
      u.r_baro = uj.value("r_baro", u.r_baro);
      u.r_vel = uj.value("r_vel", u.r_vel);
      u.r_det = uj.value("r_det", u.r_det);
      u.gate_enabled = uj.value("gate_enabled", u.gate_enabled);
      if (uj.contains("init_cov_diag")) {
        const auto& d = uj["init_cov_diag"];
        if (!d.is_array() || d.size() != 16) {
          errors.push_back("ukf.init_cov_diag: expected 16 numbers");
        } else {
          for (int i = 0; i < 16; ++i) u.init_cov_diag(i) = d[i].get<double>();
        }
      }
      require(u.alpha > 0.0 && u.alpha <= 1.0, "ukf.alpha: must be in (0, 1]", errors);
      require(u.psd_vel > 0 && u.psd_att > 0 && u.r_baro > 0 && u.r_vel > 0 && u.r_det > 0,
              "ukf: noise entries must be > 0", errors);
    }
  }

  {
    auto& n = cfg.mission.nmpc;
    n.u_max = cfg.vehicle.max_thrust;
    n.u_min = cfg.vehicle.min_thrust;
    n.u_ref = Vec4::Constant(cfg.vehicle.hover_thrust_per_motor());
    if (j.contains("nmpc")) {
      const auto& nj = j["nmpc"];
      n.horizon = nj.value("horizon", n.horizon);
      n.dt = nj.value("dt", n.dt);
      if (nj.contains("q_position")) n.q_position = to_vec3(nj["q_position"], "nmpc.q_position", errors);
      if (nj.contains("q_velocity")) n.q_velocity = to_vec3(nj["q_velocity"], "nmpc.q_velocity", errors);
      if (nj.contains("q_attitude")) n.q_attitude = to_vec3(nj["q_attitude"], "nmpc.q_attitude", errors);
      if (nj.contains("q_omega")) n.q_omega = to_vec3(nj["q_omega"], "nmpc.q_omega", errors);
      if (nj.contains("r_input")) n.r_input = to_vec4(nj["r_input"], "nmpc.r_input", errors);
      n.u_min = nj.value("u_min", n.u_min);
      n.u_max = nj.value("u_max", n.u_max);
      if (nj.contains("p_min")) n.p_min = to_vec3(nj["p_min"], "nmpc.p_min", errors);
      if (nj.contains("p_max")) n.p_max = to_vec3(nj["p_max"], "nmpc.p_max", errors);
      if (nj.contains("v_min")) n.v_min = to_vec3(nj["v_min"], "nmpc.v_min", errors);
      if (nj.contains("v_max")) n.v_max = to_vec3(nj["v_max"], "nmpc.v_max", errors);
      if (nj.contains("w_min")) n.w_min = to_vec3(nj["w_min"], "nmpc.w_min", errors);
      if (nj.contains("w_max")) n.w_max = to_vec3(nj["w_max"], "nmpc.w_max", errors);
      n.max_iterations = nj.value("max_iterations", n.max_iterations);
      n.qp_tolerance = nj.value("qp_tolerance", n.qp_tolerance);
      n.step_tolerance = nj.value("step_tolerance", n.step_tolerance);
      n.slack_weight = nj.value("slack_weight", n.slack_weight);
      require(n.horizon >= 1, "nmpc.horizon: must be >= 1", errors);
      require(n.dt > 0.0, "nmpc.dt: must be > 0", errors);
      require(n.q_position.minCoeff() > 0.0, "nmpc.q_position: entries must be > 0", errors);
      require(n.q_velocity.minCoeff() >= 0.0 && n.q_attitude.minCoeff() >= 0.0 &&
                  n.q_omega.minCoeff() >= 0.0 && n.r_input.minCoeff() >= 0.0,
              "nmpc: weights must be >= 0", errors);
      require(n.u_min >= 0.0, "nmpc.u_min: must be >= 0", errors);
      require(n.u_min <= n.u_max, "nmpc.u_min: must be <= nmpc.u_max", errors);
    }
  }

  {
    auto& c = cfg.mission.cbf;
    if (j.contains("cbf")) {
      const auto& cj = j["cbf"];
      c.r_safe = cj.value("r_safe", c.r_safe);
      c.lambda = cj.value("lambda", c.lambda);
      c.k_points = cj.value("k_points", c.k_points);
      c.update_rate = cj.value("update_rate", c.update_rate);
      c.slack_weight = cj.value("slack_weight", c.slack_weight);
      c.decimation = cj.value("decimation", c.decimation);
      c.cull_radius = cj.value("cull_radius", c.cull_radius);
      require(c.r_safe > 0.0, "cbf.r_safe: must be > 0", errors);
      require(c.lambda > 0.0, "cbf.lambda: must be > 0", errors);
      require(c.k_points >= 1, "cbf.k_points: must be >= 1", errors);
      cfg.mission.rates.cbf_rate = c.update_rate;
    }
    cfg.mission.nmpc.slack_weight = c.slack_weight;
  }

  if (j.contains("mission")) {
    const auto& m = j["mission"];
    cfg.mission.baro_update_in_track = m.value("baro_update_in_track", true);
    cfg.mission.shadow_pos_sigma0 = m.value("shadow_pos_sigma0", 5.0);
    if (m.contains("free_space_range")) {
      cfg.mission.free_space_range = m["free_space_range"].get<double>();
    }
  }
  if (!j.contains("mission") || !j["mission"].contains("free_space_range")) {
    // Threshold = 2*r_safe + stopping distance at the loiter speed, with a
    // 5 m/s^2 braking capability.
    const double v = cfg.mission.loiter.v_loiter;
    cfg.mission.free_space_range =
        2.0 * cfg.mission.cbf.r_safe + v * v / (2.0 * 5.0);
  }

  cfg.mission.duration_s = cfg.duration_s;

  if (!errors.empty()) {
    std::ostringstream oss;
    oss << "scenario validation failed:";
    for (const auto& e : errors) oss << "\n  " << e;
    throw ValidationError(oss.str());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("scenario file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ScenarioConfig anchored(const ScenarioConfig& cfg) {
  ScenarioConfig out = cfg;
  const Vec3 shift(cfg.start.position.x(), cfg.start.position.y(), 0.0);
  out.anchor = Vec2(shift.x(), shift.y());
  out.start.position -= shift;
  for (auto& s : out.environment.spheres) s.center -= shift;
  for (auto& c : out.environment.cylinders) c.base -= shift;
  out.environment.target.position -= shift;
  for (auto& w : out.environment.target.waypoints) w -= shift;
  return out;
}

}  // namespace relnav::harness
