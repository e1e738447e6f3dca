#include <doctest.h>

#include "relnav/core/camera.hpp"
#include "relnav/core/quaternion.hpp"
#include "relnav/core/rng.hpp"

using namespace relnav;

namespace {

// Independent oracle: rotation matrix for a pure yaw angle.
Mat3 yaw_rotation_matrix(double psi) {
  Mat3 r;
  r << std::cos(psi), -std::sin(psi), 0,
      std::sin(psi), std::cos(psi), 0,
      0, 0, 1;
  return r;
}

Quat random_unit_quat(Rng& rng) {
  Quat q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized();
}

}  // namespace

TEST_CASE("yaw_to_quaternion known angles") {
  const Quat q0 = yaw_to_quaternion(0.0);
  CHECK(q0.w == doctest::Approx(1.0));
  CHECK(q0.x == 0.0);
  CHECK(q0.y == 0.0);
  CHECK(q0.z == doctest::Approx(0.0));

  const Quat qpi = yaw_to_quaternion(M_PI);
  CHECK(qpi.w == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(qpi.z == doctest::Approx(1.0));

  const Quat qh = yaw_to_quaternion(M_PI / 2.0);
  CHECK(qh.w == doctest::Approx(0.7071067811865476));
  CHECK(qh.x == 0.0);
  CHECK(qh.y == 0.0);
  CHECK(qh.z == doctest::Approx(0.7071067811865475));
  CHECK(qh.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotate_vector against rotation-matrix oracle") {
  CHECK((Quat::identity().rotate(Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() < 1e-15);

  const Vec3 r1 = yaw_to_quaternion(M_PI / 2.0).rotate(Vec3(1, 0, 0));
  CHECK((r1 - yaw_rotation_matrix(M_PI / 2.0) * Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK(r1.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r1.y() == doctest::Approx(1.0));

  const Vec3 r2 = yaw_to_quaternion(M_PI).rotate(Vec3(1, 1, 0));
  CHECK((r2 - Vec3(-1, -1, 0)).norm() < 1e-12);

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Quat q = random_unit_quat(rng);
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    CHECK((q.rotate(v) - q.to_rotation_matrix() * v).norm() < 1e-12);
    CHECK(q.rotate(v).norm() == doctest::Approx(v.norm()).epsilon(1e-9));
  }
}

TEST_CASE("quaternion_error_yaw wrap-around") {
  CHECK(quaternion_error_yaw(yaw_to_quaternion(0.1), yaw_to_quaternion(0.1)) ==
        doctest::Approx(0.0));
  CHECK(quaternion_error_yaw(yaw_to_quaternion(0.2), yaw_to_quaternion(0.1)) ==
        doctest::Approx(0.1));
  // Wrap-around oracle: wrap_pi(-3.1 - 3.1) = -6.2 + 2*pi.
  CHECK(quaternion_error_yaw(yaw_to_quaternion(-3.1), yaw_to_quaternion(3.1)) ==
        doctest::Approx(0.08318530717958629).epsilon(1e-9));
  // Result lies in (-pi, pi].
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double a = 20.0 * (rng.uniform() - 0.5);
    const double b = 20.0 * (rng.uniform() - 0.5);
    const double e = quaternion_error_yaw(yaw_to_quaternion(a), yaw_to_quaternion(b));
    CHECK(e > -M_PI);
    CHECK(e <= M_PI);
  }
}

TEST_CASE("quaternion multiplication associative") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const Quat a = random_unit_quat(rng);
    const Quat b = random_unit_quat(rng);
    const Quat c = random_unit_quat(rng);
    const Quat lhs = (a * b) * c;
    const Quat rhs = a * (b * c);
    CHECK(std::abs(lhs.w - rhs.w) < 1e-12);
    CHECK(std::abs(lhs.x - rhs.x) < 1e-12);
    CHECK(std::abs(lhs.y - rhs.y) < 1e-12);
    CHECK(std::abs(lhs.z - rhs.z) < 1e-12);
  }
}

TEST_CASE("rotate composed with conjugate rotate is identity") {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const Quat q = random_unit_quat(rng);
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    CHECK((q.conjugate().rotate(q.rotate(v)) - v).norm() < 1e-9);
  }
}

TEST_CASE("yaw quaternions compose additively up to sign") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double a = 20.0 * (rng.uniform() - 0.5);
    const double b = 20.0 * (rng.uniform() - 0.5);
    const Quat prod = yaw_to_quaternion(a) * yaw_to_quaternion(b);
    const Quat direct = yaw_to_quaternion(a + b);
    const double dot = prod.w * direct.w + prod.x * direct.x +
                       prod.y * direct.y + prod.z * direct.z;
    CHECK(std::abs(std::abs(dot) - 1.0) < 1e-12);
  }
}

TEST_CASE("exp/log round trip and boxplus/boxminus inverse") {
  Rng rng(19);
  for (int i = 0; i < 300; ++i) {
    const Vec3 r(rng.normal(), rng.normal(), rng.normal());
    CHECK((quat_log(quat_exp(r * 0.3)) - r * 0.3).norm() < 1e-10);
    const Quat q = random_unit_quat(rng);
    const Quat p = random_unit_quat(rng);
    const Quat back = quat_boxplus(q, quat_boxminus(p, q));
    const double dot =
        back.w * p.w + back.x * p.x + back.y * p.y + back.z * p.z;
    CHECK(std::abs(std::abs(dot) - 1.0) < 1e-12);
  }
}

TEST_CASE("pitch extraction") {
  // Pure pitch of 0.3 rad about body y.
  const Quat q = quat_exp(Vec3(0, 0.3, 0));
  CHECK(quaternion_to_pitch(q) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(quaternion_to_pitch(Quat::identity()) == 0.0);
}

TEST_CASE("camera rays and mounts") {
  CameraModel cam;
  cam.width = 31;
  cam.height = 21;
  cam.hfov = 1.5;
  SUBCASE("center pixel is boresight") {
    const Vec3 d = cam.pixel_ray(10, 15);
    CHECK((d - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK(cam.pixel_azimuth(10, 15) == doctest::Approx(0.0));
  }
  SUBCASE("forward mount maps optical axis to body x") {
    const Vec3 d = cam.cam_to_body() * Vec3(0, 0, 1);
    CHECK((d - Vec3(1, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("down45 mount pitches the axis down") {
    cam.mount = CameraMount::Down45;
    const Vec3 d = cam.cam_to_body() * Vec3(0, 0, 1);
    CHECK(d.x() == doctest::Approx(std::sqrt(0.5)));
    CHECK(d.z() == doctest::Approx(-std::sqrt(0.5)));
  }
  SUBCASE("pixel azimuths stay within the half FOV") {
    for (int c = 0; c < cam.width; ++c) {
      CHECK(std::abs(cam.pixel_azimuth(10, c)) < 0.5 * cam.hfov);
    }
  }
}

TEST_CASE("rng determinism and statistics") {
  Rng a(42, stream::kBaro, 7);
  Rng b(42, stream::kBaro, 7);
  for (int i = 0; i < 16; ++i) CHECK(a.normal() == b.normal());

  Rng c(42, stream::kBaro, 8);
  Rng d(42, stream::kVelocity, 7);
  CHECK(c.normal() != d.normal());

  Rng e(1);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = e.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}
