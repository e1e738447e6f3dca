#pragma once

#include <optional>

#include "relnav/core/camera.hpp"
#include "relnav/core/rng.hpp"
#include "relnav/plant/dynamics.hpp"
#include "relnav/plant/environment.hpp"

namespace relnav::plant {

struct ImuSample {
  Vec3 accel;  // specific force, body frame [m/s^2]
  Vec3 gyro;   // angular rate, body frame [rad/s]
};

/// True sensor biases carried by the plant and random-walked at the control
/// rate. The estimator never sees these directly.
struct SensorBiases {
  double baro{0.0};           // m
  Vec3 accel{Vec3::Zero()};   // m/s^2
  Vec3 gyro{Vec3::Zero()};    // rad/s
};

struct SensorSuite {
  // IMU
  double accel_noise_density{0.02};   // m/s^2/sqrt(Hz)
  double gyro_noise_density{0.001};   // rad/s/sqrt(Hz)
  double accel_bias_walk{1e-4};       // m/s^2/sqrt(s)
  double gyro_bias_walk{1e-6};        // rad/s/sqrt(s)
  Vec3 accel_bias0{Vec3::Zero()};
  Vec3 gyro_bias0{Vec3::Zero()};
  double imu_rate{200.0};             // Hz

  // Barometer
  double baro_sigma{0.10};            // m
  double baro_bias_walk{1e-3};        // m/sqrt(s)
  double baro_bias0{0.0};
  double baro_rate{50.0};

  // Velocity sensor (stand-in for stereo-inertial velocity)
  double velocity_sigma{0.10};        // m/s
  double velocity_dropout{0.0};       // probability per sample
  double velocity_rate{30.0};

  // Depth camera
  CameraModel camera{};
  double depth_rate{60.0};

  // Detector
  double detector_max_range{30.0};
  double detector_c_max{0.95};
  double detector_sigma{0.15};        // m, per axis on relative position
  double detector_rate{30.0};

  std::uint64_t seed{1};
};

/// Target detection as delivered to the estimator: target position relative
/// to the body, lever-arm corrected, expressed in R_t axes.
struct Detection {
  Vec3 relative_position{Vec3::Zero()};
  double confidence{0.0};
  double bearing{0.0};  // azimuth of the target in the body frame [rad]
  double timestamp{0.0};
};

/// IMU read; deterministic in (suite.seed, cycle). accel_world must be the
/// vehicle's current world-frame acceleration (the plant knows it from the
/// applied wrench).
ImuSample sense_imu(const TrueState& s, const Vec3& accel_world,
                    const SensorBiases& b, const SensorSuite& suite,
                    std::uint64_t cycle);

double sense_baro(const TrueState& s, const SensorBiases& b,
                  const SensorSuite& suite, std::uint64_t cycle);

/// Velocity in R_t axes; absent with the configured dropout probability.
std::optional<Vec3> sense_velocity(const TrueState& s, const SensorSuite& suite,
                                   std::uint64_t cycle);

/// Noise-free synthetic depth image (per-pixel nearest hit range).
DepthImage raycast_depth(const TrueState& s, const Environment& env,
                         const SensorSuite& suite);

/// Range/FOV/occlusion detection model with confidence
/// clamp(c_max * (1 - range/max_range) * visibility, 0, 1).
std::optional<Detection> detect_target(const TrueState& s,
                                       const Environment& env,
                                       const SensorSuite& suite,
                                       std::uint64_t cycle, double t_now);

/// Random-walks the true biases over one control period.
SensorBiases step_biases(const SensorBiases& b, const SensorSuite& suite,
                         double dt, std::uint64_t cycle);

}  // namespace relnav::plant
