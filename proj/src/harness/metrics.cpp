#include "relnav/harness/metrics.hpp"

#include <algorithm>
#include <limits>

#include <json.hpp>

namespace relnav::harness {

namespace {

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double idx = p * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Distance from a point to a polyline in the horizontal plane.
double polyline_distance_xy(const Vec3& p, const std::vector<Vec3>& path) {
  double best = std::numeric_limits<double>::infinity();
  const Vec2 q(p.x(), p.y());
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec2 a(path[i].x(), path[i].y());
    const Vec2 b(path[i + 1].x(), path[i + 1].y());
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = (len2 > 1e-12) ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (q - (a + s * ab)).norm());
  }
  if (path.size() == 1) best = (q - Vec2(path[0].x(), path[0].y())).norm();
  return best;
}

}  // namespace

MetricsReport compute_metrics(const MissionLog& log,
                              const std::vector<double>& solve_ms) {
  MetricsReport m;
  const auto& recs = log.records;
  if (recs.empty()) return m;

  double speed_sum = 0.0, dev_sum = 0.0;
  double effort_sum = 0.0;
  double pitch_sum = 0.0;
  double min_clear = std::numeric_limits<double>::infinity();
  int transitions = 0;
  double track_err_sum = 0.0;
  int track_count = 0;

  // Target trace: the path actually flown by the target (decimated).
  std::vector<Vec3> target_path;
  for (std::size_t i = 0; i < recs.size(); i += 10) {
    if (target_path.empty() ||
        (recs[i].target_true - target_path.back()).norm() > 0.2) {
      target_path.push_back(recs[i].target_true);
    }
  }
  if (target_path.empty()) target_path.push_back(recs.front().target_true);

  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const double speed = std::hypot(r.v_true.x(), r.v_true.y());
    speed_sum += speed;
    m.velocity_max = std::max(m.velocity_max, speed);
    const double cmd_speed = std::hypot(r.ref_v0.x(), r.ref_v0.y());
    dev_sum += std::abs(speed - cmd_speed);

    const double yaw_err =
        std::abs(quaternion_error_yaw(r.q_true, r.ref_q0)) * 180.0 / M_PI;
    m.heading_error_max_deg = std::max(m.heading_error_max_deg, yaw_err);

    const double pitch = std::abs(quaternion_to_pitch(r.q_true)) * 180.0 / M_PI;
    pitch_sum += pitch;
    m.pitch_max_deg = std::max(m.pitch_max_deg, pitch);

    min_clear = std::min(min_clear, r.min_clearance_true);

    if (i > 0 && recs[i].mode != recs[i - 1].mode) ++transitions;

    if (r.mode == mission::Mode::Track) {
      const double dist =
          std::hypot(r.p_true.x() - r.target_true.x(),
                     r.p_true.y() - r.target_true.y());
      const double err = std::abs(dist - log.header.d_xy_track);
      track_err_sum += err;
      m.tracking_error_max = std::max(m.tracking_error_max, err);
      ++track_count;
      m.lateral_corridor_max =
          std::max(m.lateral_corridor_max,
                   polyline_distance_xy(r.p_true, target_path));
    }

    if (i > 0 && i + 1 < recs.size()) {
      const double dt = recs[i + 1].t - recs[i - 1].t;
      if (dt > 1e-9) {
        const double eff =
            ((recs[i + 1].v_true - recs[i - 1].v_true) / dt).norm();
        effort_sum += eff;
        m.effort_max = std::max(m.effort_max, eff);
      }
    }
  }

  const double n = static_cast<double>(recs.size());
  m.velocity_mean = speed_sum / n;
  m.speed_deviation_mean = dev_sum / n;
  m.pitch_mean_deg = pitch_sum / n;
  m.effort_mean = recs.size() > 2 ? effort_sum / (n - 2) : 0.0;
  m.min_clearance = min_clear;
  m.mode_transitions = transitions;
  if (track_count > 0) m.tracking_error_mean = track_err_sum / track_count;
  m.solve_ms_p50 = percentile(solve_ms, 0.50);
  m.solve_ms_p99 = percentile(solve_ms, 0.99);
  return m;
}

std::string metrics_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["velocity_mean"] = m.velocity_mean;
  j["velocity_max"] = m.velocity_max;
  j["speed_deviation_mean"] = m.speed_deviation_mean;
  j["heading_error_max_deg"] = m.heading_error_max_deg;
  j["tracking_error_mean"] = m.tracking_error_mean;
  j["tracking_error_max"] = m.tracking_error_max;
  j["lateral_corridor_max"] = m.lateral_corridor_max;
  j["min_clearance"] = std::isfinite(m.min_clearance) ? m.min_clearance : 1e30;
  j["mode_transitions"] = m.mode_transitions;
  j["solve_ms_p50"] = m.solve_ms_p50;
  j["solve_ms_p99"] = m.solve_ms_p99;
  j["effort_mean"] = m.effort_mean;
  j["effort_max"] = m.effort_max;
  j["pitch_mean_deg"] = m.pitch_mean_deg;
  j["pitch_max_deg"] = m.pitch_max_deg;
  return j.dump(2);
}

}  // namespace relnav::harness
