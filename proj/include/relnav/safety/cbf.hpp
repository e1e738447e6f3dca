#pragma once

#include <vector>

#include "relnav/core/camera.hpp"
#include "relnav/core/quaternion.hpp"

namespace relnav::safety {

struct ObstaclePoint {
  Vec3 position{Vec3::Zero()};  // R_t frame [m]
  double ttc{0.0};              // s
  int pixel_row{-1};
  int pixel_col{-1};
};

struct CbfConfig {
  double r_safe{1.0};        // m
  double lambda{2.0};        // 1/s barrier rate
  int k_points{10};
  double update_rate{60.0};  // Hz
  double slack_weight{1e4};
  int decimation{2};         // pixel stride for back-projection
  double cull_radius{25.0};  // m, points farther than this are ignored
  double min_closing_speed{0.05};  // m/s, epsilon in the TTC heuristic
};

struct BarrierTerms {
  double h{0.0};
  double h_dot{0.0};
  double h_ddot{0.0};
};

/// Pinhole back-projection of finite-range pixels into R_t, lever-arm
/// corrected. Pixels at max range are skipped.
std::vector<ObstaclePoint> depth_to_points(const DepthImage& depth,
                                           const CameraModel& cam,
                                           const Vec3& body_position,
                                           const Quat& body_attitude,
                                           const CbfConfig& cfg);

/// Picks the K most imminent points by time-to-collision:
/// s = max(eps, v.(o-p)/|o-p|), ttc = max(0, |o-p| - r_safe)/s.
/// Ties break by smaller distance, then pixel order. Deterministic.
std::vector<ObstaclePoint> select_obstacles(const std::vector<ObstaclePoint>& points,
                                            const Vec3& p, const Vec3& v,
                                            const CbfConfig& cfg);

/// Quadratic barrier h = |p-o|^2 - r_safe^2 and its first two time
/// derivatives along the dynamics (a = world-frame acceleration for the
/// candidate input).
BarrierTerms cbf_terms(const Vec3& p, const Vec3& v, const Vec3& a,
                       const Vec3& o, const CbfConfig& cfg);

/// Second-order CBF residual: h_ddot + 2*lambda*h_dot + lambda^2*h.
inline double cbf_residual(const BarrierTerms& t, const CbfConfig& cfg) {
  return t.h_ddot + 2.0 * cfg.lambda * t.h_dot + cfg.lambda * cfg.lambda * t.h;
}

}  // namespace relnav::safety
