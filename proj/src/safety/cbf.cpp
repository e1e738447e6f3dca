#include "relnav/safety/cbf.hpp"

#include <algorithm>

namespace relnav::safety {

std::vector<ObstaclePoint> depth_to_points(const DepthImage& depth,
                                           const CameraModel& cam,
                                           const Vec3& body_position,
                                           const Quat& body_attitude,
                                           const CbfConfig& cfg) {
  std::vector<ObstaclePoint> out;
  const Mat3 R_wb = body_attitude.to_rotation_matrix();
  const Mat3 R_bc = cam.cam_to_body();
  const int stride = std::max(1, cfg.decimation);
  const double cull2 = cfg.cull_radius * cfg.cull_radius;
  for (int r = 0; r < depth.height; r += stride) {
    for (int c = 0; c < depth.width; c += stride) {
      const double range = depth.at(r, c);
      if (range >= depth.max_range * (1.0 - 1e-12)) continue;
      const Vec3 p_cam = range * cam.pixel_ray(r, c);
      const Vec3 p_body = R_bc * p_cam + cam.lever_arm;
      const Vec3 p_rt = body_position + R_wb * p_body;
      if ((p_rt - body_position).squaredNorm() > cull2) continue;
      ObstaclePoint op;
      op.position = p_rt;
      op.pixel_row = r;
      op.pixel_col = c;
      out.push_back(op);
    }
  }
  return out;
}

std::vector<ObstaclePoint> select_obstacles(const std::vector<ObstaclePoint>& points,
                                            const Vec3& p, const Vec3& v,
                                            const CbfConfig& cfg) {
  struct Ranked {
    ObstaclePoint op;
    double dist;
    std::size_t order;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 rel = points[i].position - p;
    const double dist = rel.norm();
    if (dist < 1e-9) continue;  // coincident point: already colliding, skip
    const double closing = std::max(cfg.min_closing_speed, v.dot(rel) / dist);
    Ranked rk;
    rk.op = points[i];
    rk.op.ttc = std::max(0.0, dist - cfg.r_safe) / closing;
    rk.dist = dist;
    rk.order = i;
    ranked.push_back(rk);
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.op.ttc != b.op.ttc) return a.op.ttc < b.op.ttc;
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.order < b.order;
  });
  const std::size_t k = std::min<std::size_t>(cfg.k_points, ranked.size());
  std::vector<ObstaclePoint> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranked[i].op);
  return out;
}

BarrierTerms cbf_terms(const Vec3& p, const Vec3& v, const Vec3& a,
                       const Vec3& o, const CbfConfig& cfg) {
  BarrierTerms t;
  const Vec3 rel = p - o;
  t.h = rel.squaredNorm() - cfg.r_safe * cfg.r_safe;
  t.h_dot = 2.0 * rel.dot(v);
  t.h_ddot = 2.0 * v.squaredNorm() + 2.0 * rel.dot(a);
  return t;
}

}  // namespace relnav::safety
