#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace relnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kGravity = 9.81;  // m/s^2

/// Wraps an angle to (-pi, pi].
inline double wrap_pi(double a) {
  double r = std::remainder(a, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

/// Unit quaternion, Hamilton convention, scalar-first storage (w, x, y, z).
/// All serializations use this component order.
struct Quat {
  double w{1.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  Quat operator*(const Quat& r) const {
    return {w * r.w - x * r.x - y * r.y - z * r.z,
            w * r.x + x * r.w + y * r.z - z * r.y,
            w * r.y - x * r.z + y * r.w + z * r.x,
            w * r.z + x * r.y - y * r.x + z * r.w};
  }

  /// Rotates v by this quaternion: q (0,v) q*.
  Vec3 rotate(const Vec3& v) const {
    // Expanded form of q (0,v) q*, avoids constructing temporaries.
    const Vec3 qv(x, y, z);
    const Vec3 t = 2.0 * qv.cross(v);
    return v + w * t + qv.cross(t);
  }

  Mat3 to_rotation_matrix() const {
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
  }

  Vec4 coeffs() const { return {w, x, y, z}; }
};

/// Left-multiplication matrix: quat_mat_left(q) * r.coeffs() == (q * r).coeffs().
inline Mat4 quat_mat_left(const Quat& q) {
  Mat4 m;
  m << q.w, -q.x, -q.y, -q.z,
      q.x, q.w, -q.z, q.y,
      q.y, q.z, q.w, -q.x,
      q.z, -q.y, q.x, q.w;
  return m;
}

/// Right-multiplication matrix: quat_mat_right(r) * q.coeffs() == (q * r).coeffs().
inline Mat4 quat_mat_right(const Quat& r) {
  Mat4 m;
  m << r.w, -r.x, -r.y, -r.z,
      r.x, r.w, r.z, -r.y,
      r.y, -r.z, r.w, r.x,
      r.z, r.y, -r.x, r.w;
  return m;
}

/// Exponential map: rotation vector (axis * angle) to unit quaternion.
inline Quat quat_exp(const Vec3& rotvec) {
  const double angle2 = rotvec.squaredNorm();
  if (angle2 < 1e-16) {
    // Series expansion of cos(a/2), sin(a/2)/a around zero.
    const double c = 1.0 - angle2 / 8.0;
    const double s = 0.5 - angle2 / 48.0;
    Quat q(c, s * rotvec.x(), s * rotvec.y(), s * rotvec.z());
    return q.normalized();
  }
  const double angle = std::sqrt(angle2);
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle) / angle;
  return {c, s * rotvec.x(), s * rotvec.y(), s * rotvec.z()};
}

/// Logarithm map: unit quaternion to rotation vector, shortest arc.
inline Vec3 quat_log(const Quat& q_in) {
  Quat q = q_in;
  if (q.w < 0.0) {  // shortest arc: q and -q encode the same rotation
    q = {-q.w, -q.x, -q.y, -q.z};
  }
  const Vec3 v(q.x, q.y, q.z);
  const double vn = v.norm();
  if (vn < 1e-12) return 2.0 * v;  // small-angle: sin(a/2) ~ a/2
  const double angle = 2.0 * std::atan2(vn, q.w);
  return (angle / vn) * v;
}

/// Local perturbation: q boxplus delta = q * exp(delta).
inline Quat quat_boxplus(const Quat& q, const Vec3& delta) {
  return (q * quat_exp(delta)).normalized();
}

/// Local difference: (a boxminus b) such that b boxplus (a boxminus b) == a.
inline Vec3 quat_boxminus(const Quat& a, const Quat& b) {
  return quat_log(b.conjugate() * a);
}

inline Quat yaw_to_quaternion(double psi) {
  return {std::cos(0.5 * psi), 0.0, 0.0, std::sin(0.5 * psi)};
}

/// Yaw of the body x-axis projected onto the horizontal plane.
inline double quaternion_to_yaw(const Quat& q) {
  return std::atan2(2.0 * (q.w * q.z + q.x * q.y),
                    1.0 - 2.0 * (q.y * q.y + q.z * q.z));
}

/// Signed shortest-arc yaw difference yaw(a) - yaw(b), in (-pi, pi].
inline double quaternion_error_yaw(const Quat& q_a, const Quat& q_b) {
  return wrap_pi(quaternion_to_yaw(q_a) - quaternion_to_yaw(q_b));
}

/// Pitch angle (rotation about body y in a z-up frame), from ZYX Euler extraction.
inline double quaternion_to_pitch(const Quat& q) {
  const double s = -2.0 * (q.x * q.z - q.w * q.y);
  return std::asin(std::clamp(s, -1.0, 1.0));
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
      v.z(), 0, -v.x(),
      -v.y(), v.x(), 0;
  return m;
}

enum class FrameKind { RelativeLoiter, RelativeTrack, Body, Camera };

/// Frame identity: which convention anchors it and when it was (re-)anchored.
struct FrameTag {
  FrameKind kind{FrameKind::RelativeLoiter};
  std::int64_t anchor_epoch{0};
};

struct Pose {
  Vec3 position{Vec3::Zero()};
  Quat attitude{};
  FrameTag frame{};
};

}  // namespace relnav
