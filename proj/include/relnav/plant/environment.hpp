#pragma once

#include <optional>
#include <vector>

#include "relnav/core/quaternion.hpp"

namespace relnav::plant {

struct Sphere {
  Vec3 center{Vec3::Zero()};
  double radius{1.0};
};

/// Vertical cylinder: axis through (base.x, base.y), z in [base.z, base.z + height].
struct Cylinder {
  Vec3 base{Vec3::Zero()};
  double radius{0.2};
  double height{10.0};
};

enum class TargetMotion { Static, ConstantVelocity, Waypoints };

struct TargetState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  TargetMotion motion{TargetMotion::Static};
  std::vector<Vec3> waypoints;
  double speed{0.0};        // m/s along waypoint legs
  int waypoint_index{0};
  double visual_size{0.5};  // m
};

struct Environment {
  std::vector<Sphere> spheres;
  std::vector<Cylinder> cylinders;
  double ground_z{0.0};
  TargetState target;
};

/// Nearest intersection distance along a unit-direction ray, or max_range.
double raycast(const Vec3& origin, const Vec3& dir, const Environment& env,
               double max_range);

/// Signed distance from a point to the nearest obstacle surface (ground plane
/// included); negative inside an obstacle.
double clearance(const Vec3& p, const Environment& env);

/// Same, but ignoring the ground plane (obstacle clearance for metrics).
double obstacle_clearance(const Vec3& p, const Environment& env);

/// Advances the target by dt. Waypoint targets pursue the next waypoint at
/// the configured speed and advance on arrival within 0.5 m (looping).
TargetState step_target(const TargetState& t, double dt);

}  // namespace relnav::plant
