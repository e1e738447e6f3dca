#pragma once

#include <vector>

#include "relnav/core/quaternion.hpp"

namespace relnav {

enum class CameraMount { Forward, Down45 };

/// Row-major range image; max_range where a ray hits nothing.
struct DepthImage {
  int width{0};
  int height{0};
  double max_range{0.0};
  std::vector<double> ranges;  // height * width, row-major

  double at(int row, int col) const { return ranges[row * width + col]; }
  double& at(int row, int col) { return ranges[row * width + col]; }
};

/// Pinhole camera with a fixed body mount. Camera frame: z along the optical
/// axis, x right, y down. Horizontal FOV spans the full image width.
struct CameraModel {
  int width{31};
  int height{21};
  double hfov{1.5};            // rad
  double max_range{20.0};      // m
  CameraMount mount{CameraMount::Forward};
  Vec3 lever_arm{Vec3::Zero()};  // camera position in body frame [m]

  double focal_length() const { return 0.5 * width / std::tan(0.5 * hfov); }
  double cx() const { return 0.5 * (width - 1); }
  double cy() const { return 0.5 * (height - 1); }
  double vfov() const {
    return 2.0 * std::atan(0.5 * height / focal_length());
  }

  /// Unit ray direction of pixel (row, col) in the camera frame.
  Vec3 pixel_ray(int row, int col) const {
    const double f = focal_length();
    return Vec3((col - cx()) / f, (row - cy()) / f, 1.0).normalized();
  }

  /// Camera-to-body rotation for the configured mount.
  Mat3 cam_to_body() const {
    Mat3 forward;
    // x_cam -> -y_body (right), y_cam -> -z_body (down), z_cam -> +x_body.
    forward << 0, 0, 1,
        -1, 0, 0,
        0, -1, 0;
    if (mount == CameraMount::Forward) return forward;
    // Down45: optical axis pitched 45 deg below the body x-axis.
    const double c = std::cos(M_PI / 4.0), s = std::sin(M_PI / 4.0);
    Mat3 pitch;
    pitch << c, 0, s,
        0, 1, 0,
        -s, 0, c;
    return pitch * forward;
  }

  /// Azimuth of a pixel ray in the body frame (about body z, from body x).
  double pixel_azimuth(int row, int col) const {
    const Vec3 d = cam_to_body() * pixel_ray(row, col);
    return std::atan2(d.y(), d.x());
  }
};

}  // namespace relnav
