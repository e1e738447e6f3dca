#include "relnav/plant/environment.hpp"

#include <limits>

namespace relnav::plant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ray_sphere(const Vec3& o, const Vec3& d, const Sphere& s) {
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > 0.0) return t0;
  const double t1 = -b + sq;
  if (t1 > 0.0) return t1;  // origin inside the sphere
  return kInf;
}

double ray_cylinder(const Vec3& o, const Vec3& d, const Cylinder& c) {
  const double z_lo = c.base.z();
  const double z_hi = c.base.z() + c.height;
  double best = kInf;

  // Side surface: 2D circle intersection in the horizontal plane.
  const double dx = d.x(), dy = d.y();
  const double ox = o.x() - c.base.x(), oy = o.y() - c.base.y();
  const double a = dx * dx + dy * dy;
  if (a > 1e-12) {
    const double b = (ox * dx + oy * dy) / a;
    const double q = (ox * ox + oy * oy - c.radius * c.radius) / a;
    const double disc = b * b - q;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double t : {-b - sq, -b + sq}) {
        if (t > 0.0 && t < best) {
          const double z = o.z() + t * d.z();
          if (z >= z_lo && z <= z_hi) best = t;
        }
      }
    }
  }

  // Caps.
  if (std::abs(d.z()) > 1e-12) {
    for (const double zc : {z_lo, z_hi}) {
      const double t = (zc - o.z()) / d.z();
      if (t > 0.0 && t < best) {
        const double px = o.x() + t * d.x() - c.base.x();
        const double py = o.y() + t * d.y() - c.base.y();
        if (px * px + py * py <= c.radius * c.radius) best = t;
      }
    }
  }
  return best;
}

double sphere_distance(const Vec3& p, const Sphere& s) {
  return (p - s.center).norm() - s.radius;
}

double cylinder_distance(const Vec3& p, const Cylinder& c) {
  const double hor =
      std::hypot(p.x() - c.base.x(), p.y() - c.base.y()) - c.radius;
  const double z_lo = c.base.z(), z_hi = c.base.z() + c.height;
  const double dz = (p.z() < z_lo) ? z_lo - p.z()
                    : (p.z() > z_hi) ? p.z() - z_hi
                                     : 0.0;
  if (hor <= 0.0 && dz == 0.0) return hor;  // inside (negative = penetration)
  return std::hypot(std::max(hor, 0.0), dz);
}

}  // namespace

double raycast(const Vec3& origin, const Vec3& dir, const Environment& env,
               double max_range) {
  double best = max_range;
  for (const auto& s : env.spheres) {
    best = std::min(best, ray_sphere(origin, dir, s));
  }
  for (const auto& c : env.cylinders) {
    best = std::min(best, ray_cylinder(origin, dir, c));
  }
  if (dir.z() < -1e-12) {
    const double t = (env.ground_z - origin.z()) / dir.z();
    if (t > 0.0) best = std::min(best, t);
  }
  return std::min(best, max_range);
}

double obstacle_clearance(const Vec3& p, const Environment& env) {
  double best = kInf;
  for (const auto& s : env.spheres) best = std::min(best, sphere_distance(p, s));
  for (const auto& c : env.cylinders) {
    best = std::min(best, cylinder_distance(p, c));
  }
  return best;
}

double clearance(const Vec3& p, const Environment& env) {
  return std::min(obstacle_clearance(p, env), p.z() - env.ground_z);
}

TargetState step_target(const TargetState& t, double dt) {
  TargetState out = t;
  switch (t.motion) {
    case TargetMotion::Static:
      break;
    case TargetMotion::ConstantVelocity:
      out.position += t.velocity * dt;
      break;
    case TargetMotion::Waypoints: {
      if (t.waypoints.empty()) break;
      const Vec3& wp = t.waypoints[t.waypoint_index % t.waypoints.size()];
      const Vec3 to_wp = wp - t.position;
      const double dist = to_wp.norm();
      if (dist < 0.5) {
        out.waypoint_index = (t.waypoint_index + 1) %
                             static_cast<int>(t.waypoints.size());
        out.velocity = Vec3::Zero();
        break;
      }
      const Vec3 dir = to_wp / dist;
      const double step = std::min(t.speed * dt, dist);
      out.position = t.position + dir * step;
      out.velocity = dir * t.speed;
      break;
    }
  }
  return out;
}

}  // namespace relnav::plant
