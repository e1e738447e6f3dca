#pragma once

#include "relnav/core/quaternion.hpp"

namespace relnav::plant {

/// Physical vehicle parameters. X configuration, motor order
/// (front-right, back-left, front-left, back-right); front-right and
/// back-left spin so their drag torque is +z, the other pair -z.
struct QuadrotorParams {
  double mass{1.2};                      // kg
  Vec3 inertia_diag{0.010, 0.010, 0.018};  // kg m^2
  double arm_length{0.125};              // m, motor span 25 cm
  double thrust_to_weight{4.0};
  double torque_coeff{0.012};            // N m per N of thrust
  double min_thrust{0.0};                // per motor, N
  double max_thrust{11.772};             // per motor, N
  double drag_coeff{0.30};               // N s / m, linear

  double hover_thrust_per_motor() const { return mass * kGravity / 4.0; }
  /// Moment arm of each motor about the body x/y axes.
  double moment_arm() const { return arm_length / std::sqrt(2.0); }
};

struct WrenchCommand {
  double collective{0.0};  // N
  Vec3 torque{Vec3::Zero()};  // N m, body frame
  bool saturated{false};
};

/// Mixes individual motor thrusts into collective thrust and body torques.
/// Out-of-bound thrusts saturate (the rotors cannot do more); the flag lets
/// the caller log it.
inline WrenchCommand allocate(const Vec4& motor_thrusts,
                              const QuadrotorParams& p) {
  WrenchCommand w;
  Vec4 f = motor_thrusts;
  for (int i = 0; i < 4; ++i) {
    const double clamped = std::clamp(f[i], p.min_thrust, p.max_thrust);
    if (clamped != f[i]) w.saturated = true;
    f[i] = clamped;
  }
  const double d = p.moment_arm();
  w.collective = f.sum();
  w.torque.x() = d * (-f[0] + f[1] + f[2] - f[3]);
  w.torque.y() = d * (-f[0] + f[1] - f[2] + f[3]);
  w.torque.z() = p.torque_coeff * (f[0] + f[1] - f[2] - f[3]);
  return w;
}

}  // namespace relnav::plant
