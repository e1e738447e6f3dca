#include "relnav/plant/sensors.hpp"

namespace relnav::plant {

namespace {

Vec3 normal3(Rng& rng) {
  const double a = rng.normal();
  const double b = rng.normal();
  const double c = rng.normal();
  return {a, b, c};
}

}  // namespace

ImuSample sense_imu(const TrueState& s, const Vec3& accel_world,
                    const SensorBiases& b, const SensorSuite& suite,
                    std::uint64_t cycle) {
  Rng rng(suite.seed, stream::kImu, cycle);
  const Mat3 R_wb = s.attitude.to_rotation_matrix();
  // Specific force: acceleration minus gravity, in body axes.
  const Vec3 f_body = R_wb.transpose() * (accel_world + kGravity * Vec3::UnitZ());
  const double sa = suite.accel_noise_density * std::sqrt(suite.imu_rate);
  const double sg = suite.gyro_noise_density * std::sqrt(suite.imu_rate);
  ImuSample out;
  out.accel = f_body + b.accel + sa * normal3(rng);
  out.gyro = s.angular_velocity + b.gyro + sg * normal3(rng);
  return out;
}

double sense_baro(const TrueState& s, const SensorBiases& b,
                  const SensorSuite& suite, std::uint64_t cycle) {
  Rng rng(suite.seed, stream::kBaro, cycle);
  return s.position.z() + b.baro + suite.baro_sigma * rng.normal();
}

std::optional<Vec3> sense_velocity(const TrueState& s, const SensorSuite& suite,
                                   std::uint64_t cycle) {
  Rng rng(suite.seed, stream::kVelocity, cycle);
  const double drop = rng.uniform();
  const Vec3 noise = suite.velocity_sigma * normal3(rng);
  if (drop < suite.velocity_dropout) return std::nullopt;
  return s.velocity + noise;
}

DepthImage raycast_depth(const TrueState& s, const Environment& env,
                         const SensorSuite& suite) {
  const CameraModel& cam = suite.camera;
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.max_range = cam.max_range;
  img.ranges.resize(static_cast<std::size_t>(cam.width) * cam.height);
  const Mat3 R_wb = s.attitude.to_rotation_matrix();
  const Mat3 R_bc = cam.cam_to_body();
  const Vec3 origin = s.position + R_wb * cam.lever_arm;
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const Vec3 dir = R_wb * (R_bc * cam.pixel_ray(r, c));
      img.at(r, c) = raycast(origin, dir, env, cam.max_range);
    }
  }
  return img;
}

std::optional<Detection> detect_target(const TrueState& s,
                                       const Environment& env,
                                       const SensorSuite& suite,
                                       std::uint64_t cycle, double t_now) {
  const CameraModel& cam = suite.camera;
  const Mat3 R_wb = s.attitude.to_rotation_matrix();
  const Vec3 cam_pos = s.position + R_wb * cam.lever_arm;
  const Vec3 rel_world = env.target.position - cam_pos;
  const double range = rel_world.norm();
  if (range < 1e-9) return std::nullopt;
  if (range > suite.detector_max_range) return std::nullopt;

  // FOV test in the camera frame.
  const Mat3 R_bc = cam.cam_to_body();
  const Vec3 d_cam = R_bc.transpose() * (R_wb.transpose() * rel_world);
  if (d_cam.z() <= 0.0) return std::nullopt;
  if (std::abs(std::atan2(d_cam.x(), d_cam.z())) > 0.5 * cam.hfov) {
    return std::nullopt;
  }
  if (std::abs(std::atan2(d_cam.y(), d_cam.z())) > 0.5 * cam.vfov()) {
    return std::nullopt;
  }

  // Occlusion: a hit strictly between the camera and the target blocks it.
  const Vec3 dir = rel_world / range;
  const double hit = raycast(cam_pos, dir, env, cam.max_range);
  const double visibility =
      (hit < range - env.target.visual_size) ? 0.0 : 1.0;
  const double confidence = std::clamp(
      suite.detector_c_max * (1.0 - range / suite.detector_max_range) *
          visibility,
      0.0, 1.0);
  if (confidence <= 0.0) return std::nullopt;

  Rng rng(suite.seed, stream::kDetector, cycle);
  Detection det;
  // Relative to the body origin (lever-arm corrected), in R_t axes.
  det.relative_position =
      (env.target.position - s.position) + suite.detector_sigma * normal3(rng);
  const Vec3 rel_body = R_wb.transpose() * det.relative_position;
  det.bearing = std::atan2(rel_body.y(), rel_body.x());
  det.confidence = confidence;
  det.timestamp = t_now;
  return det;
}

SensorBiases step_biases(const SensorBiases& b, const SensorSuite& suite,
                         double dt, std::uint64_t cycle) {
  Rng rng(suite.seed, stream::kBiasWalk, cycle);
  const double sq = std::sqrt(dt);
  SensorBiases out = b;
  out.baro += suite.baro_bias_walk * sq * rng.normal();
  out.accel += suite.accel_bias_walk * sq * normal3(rng);
  out.gyro += suite.gyro_bias_walk * sq * normal3(rng);
  return out;
}

}  // namespace relnav::plant
