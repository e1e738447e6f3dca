#include "relnav/harness/log.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relnav::harness {

using nlohmann::json;

namespace {

// JSON has no infinity; clamp to a sentinel that survives round trips.
double finite_or_sentinel(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? 1e30 : -1e30;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec4_json(const Vec4& v) {
  return json::array({v(0), v(1), v(2), v(3)});
}
json quat_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

Vec3 vec3_from(const json& j) { return {j[0], j[1], j[2]}; }
Vec4 vec4_from(const json& j) { return {j[0], j[1], j[2], j[3]}; }
Quat quat_from(const json& j) { return {j[0], j[1], j[2], j[3]}; }

}  // namespace

std::string header_to_json(const LogHeader& h) {
  json j;
  j["type"] = "header";
  j["name"] = h.name;
  j["schema_version"] = h.schema_version;
  j["seed"] = h.seed;
  j["anchor"] = json::array({h.anchor.x(), h.anchor.y()});
  j["control_rate"] = h.control_rate;
  j["tau_up"] = h.tau_up;
  j["tau_down"] = h.tau_down;
  j["r_safe"] = h.r_safe;
  j["d_xy_track"] = h.d_xy_track;
  j["v_loiter"] = h.v_loiter;
  return j.dump();
}

std::string record_to_json(const mission::CycleRecord& r) {
  json j;
  j["type"] = "record";
  j["t"] = r.t;
  j["cycle"] = r.cycle;
  j["mode"] = (r.mode == mission::Mode::Loiter) ? "loiter" : "track";
  j["pt"] = vec3_json(r.p_true);
  j["vt"] = vec3_json(r.v_true);
  j["qt"] = quat_json(r.q_true);
  j["wt"] = vec3_json(r.w_true);
  j["tg"] = vec3_json(r.target_true);
  j["pe"] = vec3_json(r.p_est);
  j["ve"] = vec3_json(r.v_est);
  j["qe"] = quat_json(r.q_est);
  j["bp"] = r.bp_est;
  j["tr"] = finite_or_sentinel(r.trace);
  j["psi"] = r.psi_ref;
  j["rp"] = vec3_json(r.ref_p0);
  j["rv"] = vec3_json(r.ref_v0);
  j["rq"] = quat_json(r.ref_q0);
  j["u"] = vec4_json(r.command);
  j["sat"] = r.command_saturated;
  j["si"] = r.solver_iterations;
  j["qi"] = r.qp_iterations;
  j["kkt"] = finite_or_sentinel(r.kkt_residual);
  j["st"] = r.solver_status;
  j["sl"] = r.max_slack;
  j["mh"] = finite_or_sentinel(r.min_h);
  j["mc"] = finite_or_sentinel(r.min_clearance_true);
  j["np"] = r.n_constraint_points;
  j["det"] = r.detection_present;
  if (r.detection_present) {
    j["dr"] = vec3_json(r.det_rel);
    j["dc"] = r.det_conf;
    j["db"] = r.det_bearing;
  }
  if (r.fault) j["fault"] = true;
  return j.dump();
}

MissionLog run_mission(const ScenarioConfig& raw) {
  const ScenarioConfig cfg = anchored(raw);
  MissionLog log;
  log.header.name = cfg.name;
  log.header.seed = cfg.seed;
  log.header.anchor = cfg.anchor;
  log.header.control_rate = cfg.mission.rates.control_rate;
  log.header.tau_up = cfg.mission.mode_switch.tau_up;
  log.header.tau_down = cfg.mission.mode_switch.tau_down;
  log.header.r_safe = cfg.mission.cbf.r_safe;
  log.header.d_xy_track = cfg.mission.track.d_xy_track;
  log.header.v_loiter = cfg.mission.loiter.v_loiter;

  try {
    mission::MissionLoop loop(cfg.mission, cfg.vehicle, cfg.environment,
                              cfg.sensors, cfg.start);
    loop.run([&log](const mission::CycleRecord& r) { log.records.push_back(r); });
  } catch (const std::exception& e) {
    log.fault = true;
    log.fault_message = e.what();
  }
  return log;
}

void write_log(const MissionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open log for writing: " + path);
  out << header_to_json(log.header) << "\n";
  for (const auto& r : log.records) out << record_to_json(r) << "\n";
  if (log.fault) {
    json j;
    j["type"] = "fault";
    j["message"] = log.fault_message;
    out << j.dump() << "\n";
  }
}

MissionLog read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log: " + path);
  MissionLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "header") {
      log.header.name = j.value("name", "");
      log.header.schema_version = j.value("schema_version", 1);
      log.header.seed = j.value("seed", 1ULL);
      log.header.anchor = Vec2(j["anchor"][0], j["anchor"][1]);
      log.header.control_rate = j.value("control_rate", 200.0);
      log.header.tau_up = j.value("tau_up", 0.0);
      log.header.tau_down = j.value("tau_down", 0.0);
      log.header.r_safe = j.value("r_safe", 0.0);
      log.header.d_xy_track = j.value("d_xy_track", 0.0);
      log.header.v_loiter = j.value("v_loiter", 0.0);
    } else if (type == "record") {
      mission::CycleRecord r;
      r.t = j["t"];
      r.cycle = j["cycle"];
      r.mode = (j["mode"] == "track") ? mission::Mode::Track
                                      : mission::Mode::Loiter;
      r.p_true = vec3_from(j["pt"]);
      r.v_true = vec3_from(j["vt"]);
      r.q_true = quat_from(j["qt"]);
      r.w_true = vec3_from(j["wt"]);
      r.target_true = vec3_from(j["tg"]);
      r.p_est = vec3_from(j["pe"]);
      r.v_est = vec3_from(j["ve"]);
      r.q_est = quat_from(j["qe"]);
      r.bp_est = j["bp"];
      r.trace = j["tr"];
      r.psi_ref = j["psi"];
      r.ref_p0 = vec3_from(j["rp"]);
      r.ref_v0 = vec3_from(j["rv"]);
      r.ref_q0 = quat_from(j["rq"]);
      r.command = vec4_from(j["u"]);
      r.command_saturated = j["sat"];
      r.solver_iterations = j["si"];
      r.qp_iterations = j["qi"];
      r.kkt_residual = j["kkt"];
      r.solver_status = j["st"];
      r.max_slack = j["sl"];
      r.min_h = j["mh"];
      r.min_clearance_true = j["mc"];
      r.n_constraint_points = j["np"];
      r.detection_present = j["det"];
      if (r.detection_present) {
        r.det_rel = vec3_from(j["dr"]);
        r.det_conf = j["dc"];
        r.det_bearing = j["db"];
      }
      r.fault = j.value("fault", false);
      log.records.push_back(r);
    } else if (type == "fault") {
      log.fault = true;
      log.fault_message = j.value("message", "");
    }
  }
  return log;
}

void write_timing(const MissionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open timing file: " + path);
  out << "cycle,solve_ms\n";
  for (const auto& r : log.records) {
    out << r.cycle << "," << r.solve_wall_ms << "\n";
  }
}

std::vector<double> read_timing(const std::string& path) {
  std::ifstream in(path);
  std::vector<double> out;
  if (!in) return out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out.push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace relnav::harness
