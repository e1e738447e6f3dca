#pragma once

#include "relnav/plant/params.hpp"

namespace relnav::plant {

/// Ground-truth rigid-body state in the loiter-anchored world surrogate frame
/// (z up, gravity -z).
struct TrueState {
  Vec3 position{Vec3::Zero()};          // m
  Vec3 velocity{Vec3::Zero()};          // m/s
  Quat attitude{};                      // body -> world
  Vec3 angular_velocity{Vec3::Zero()};  // rad/s, body frame
};

struct StateDerivative {
  Vec3 p_dot;
  Vec3 v_dot;
  Quat q_dot;  // component-wise derivative, not a unit quaternion
  Vec3 w_dot;
};

/// World-frame acceleration for a given wrench: -g e_z + R e_z T/m - (c/m) v.
Vec3 acceleration(const TrueState& s, double collective,
                  const QuadrotorParams& p);

StateDerivative dynamics_derivative(const TrueState& s,
                                    const WrenchCommand& wrench,
                                    const QuadrotorParams& p);

/// One RK4 step of the nominal rigid-body model; attitude renormalized.
/// Throws std::runtime_error on non-finite output (a simulation bug, never a
/// recoverable condition). No dt guard: the prediction model integrates at
/// the shooting interval.
TrueState rk4_step(const TrueState& s, const WrenchCommand& w,
                   const QuadrotorParams& p, double dt);

/// Plant-facing step; requires dt in (0, 0.05].
TrueState step_dynamics(const TrueState& s, const Vec4& motor_thrusts,
                        const QuadrotorParams& p, double dt);

/// Same step from a pre-mixed wrench (used by the inner plant loop so the
/// saturation point is identical across substeps).
TrueState step_dynamics_wrench(const TrueState& s, const WrenchCommand& w,
                               const QuadrotorParams& p, double dt);

}  // namespace relnav::plant
