#pragma once

#include <optional>
#include <vector>

#include "relnav/core/quaternion.hpp"
#include "relnav/estimator/ukf.hpp"
#include "relnav/plant/sensors.hpp"

namespace relnav::reference {

enum class HeadingPolicy { Fixed, DetectionBiased, FreeSpace };

struct LoiterParams {
  double p_z_loiter{12.0};   // m
  double v_loiter{4.0};      // m/s
  HeadingPolicy psi_policy{HeadingPolicy::Fixed};
  double psi0{0.0};          // rad, initial/fixed heading
  double bias_gain{1.0};
  double bias_clamp{0.3};    // rad, max single-call heading correction
};

struct TrackParams {
  double d_xy_track{6.0};    // m, horizontal standoff
  double d_z_track{8.0};     // m, vertical offset
};

struct Stage {
  Vec3 position{Vec3::Zero()};
  Quat attitude{};
  Vec3 velocity{Vec3::Zero()};
  FrameTag frame{};
};

/// N+1 stage targets; velocities are finite differences of positions with the
/// terminal value repeated.
struct ReferenceTrajectory {
  std::vector<Stage> stages;
  bool degenerate{false};  // track geometry fell back to the previous bearing
};

/// Constant-speed rollout at altitude p_z_loiter along heading psi; every
/// stage attitude is the yaw-only quaternion of psi.
ReferenceTrajectory loiter_reference(const estimator::EstimatorState& x,
                                     const LoiterParams& lp, double psi, int N,
                                     double dt);

struct TrackReferenceResult {
  ReferenceTrajectory trajectory;
  Vec2 direction;  // unit horizontal bearing used (feeds the next call)
};

/// Standoff hold: every stage at unit(p_xy)*d_xy + (0,0,d_z), yaw psi_track.
/// When the vehicle is horizontally coincident with the target (<= 1e-6 m),
/// holds prev_direction and flags the trajectory degenerate.
TrackReferenceResult track_reference(const estimator::EstimatorState& x,
                                     const TrackParams& tp, double psi_track,
                                     int N,
                                     const std::optional<Vec2>& prev_direction);

/// Detection-biased heading: psi plus a clamped correction toward the
/// detection bearing, proportional to confidence.
double bias_heading(double psi, const std::optional<plant::Detection>& det,
                    double yaw_estimate, const LoiterParams& lp);

/// Look-at heading toward the target-anchored origin.
double track_heading(const estimator::EstimatorState& x);

}  // namespace relnav::reference
