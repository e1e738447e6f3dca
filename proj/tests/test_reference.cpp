#include <doctest.h>

#include "relnav/core/rng.hpp"
#include "relnav/reference/free_space.hpp"
#include "relnav/reference/reference.hpp"

using namespace relnav;
using namespace relnav::reference;

namespace {

estimator::EstimatorState at(const Vec3& p) {
  estimator::EstimatorState x;
  x.p = p;
  return x;
}

// Brute-force exact squared Euclidean distance transform (oracle).
std::vector<double> brute_edt(const std::vector<bool>& mask, int w, int h) {
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask[r * w + c]) continue;
      // Nearest false cell; the ring outside the image counts as false.
      double best = std::numeric_limits<double>::infinity();
      const double border =
          std::min(std::min(r + 1, h - r), std::min(c + 1, w - c));
      best = border * border;
      for (int rr = 0; rr < h; ++rr) {
        for (int cc = 0; cc < w; ++cc) {
          if (mask[rr * w + cc]) continue;
          const double d2 = double(rr - r) * (rr - r) + double(cc - c) * (cc - c);
          best = std::min(best, d2);
        }
      }
      out[r * w + c] = best;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("loiter_reference rollout") {
  LoiterParams lp;
  lp.p_z_loiter = 12.0;
  lp.v_loiter = 4.0;
  SUBCASE("stage evaluation at the flight-test parameters") {
    const auto traj = loiter_reference(at(Vec3(0, 0, 10)), lp, 0.0, 10, 0.2);
    REQUIRE(traj.stages.size() == 11);
    CHECK((traj.stages[1].position - Vec3(0.8, 0, 12)).norm() < 1e-12);
    CHECK((traj.stages[10].position - Vec3(8.0, 0, 12)).norm() < 1e-12);
  }
  SUBCASE("zero speed degenerates to a hold") {
    lp.v_loiter = 0.0;
    const auto traj = loiter_reference(at(Vec3(3, -1, 10)), lp, 0.7, 10, 0.2);
    for (const auto& st : traj.stages) {
      CHECK((st.position - Vec3(3, -1, 12)).norm() < 1e-12);
      CHECK(st.velocity.norm() < 1e-12);
    }
  }
  SUBCASE("affine in the horizontal estimate (drift relativity)") {
    const auto a = loiter_reference(at(Vec3(0, 0, 10)), lp, 0.4, 10, 0.2);
    const auto b = loiter_reference(at(Vec3(123.25, -7.5, 10)), lp, 0.4, 10, 0.2);
    for (int i = 0; i <= 10; ++i) {
      const Vec3 d = b.stages[i].position - a.stages[i].position;
      CHECK(d.x() == doctest::Approx(123.25).epsilon(1e-12));
      CHECK(d.y() == doctest::Approx(-7.5).epsilon(1e-12));
      CHECK(d.z() == 0.0);
      CHECK((b.stages[i].velocity - a.stages[i].velocity).norm() < 1e-12);
    }
  }
  SUBCASE("attitudes are yaw-only and velocities are finite differences") {
    const auto traj = loiter_reference(at(Vec3(1, 2, 10)), lp, 1.1, 10, 0.2);
    for (int i = 0; i <= 10; ++i) {
      CHECK(traj.stages[i].attitude.x == 0.0);
      CHECK(traj.stages[i].attitude.y == 0.0);
    }
    for (int i = 0; i < 10; ++i) {
      const Vec3 fd =
          (traj.stages[i + 1].position - traj.stages[i].position) / 0.2;
      CHECK((traj.stages[i].velocity - fd).norm() < 1e-9);
    }
  }
}

TEST_CASE("track_reference standoff hold") {
  TrackParams tp;
  SUBCASE("unit-direction scaling") {
    tp.d_xy_track = 5.0;
    tp.d_z_track = 2.0;
    const auto res = track_reference(at(Vec3(3, 4, 1)), tp, 0.0, 10, std::nullopt);
    for (const auto& st : res.trajectory.stages) {
      CHECK((st.position - Vec3(3, 4, 2)).norm() < 1e-12);
    }
    CHECK(!res.trajectory.degenerate);
  }
  SUBCASE("closing the gap along the bearing line") {
    tp.d_xy_track = 5.0;
    tp.d_z_track = 0.0;
    const auto res = track_reference(at(Vec3(10, 0, 0)), tp, 0.0, 5, std::nullopt);
    CHECK((res.trajectory.stages[0].position - Vec3(5, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("equilibrium at the standoff distance") {
    tp.d_xy_track = 5.0;
    tp.d_z_track = 1.0;
    const auto res = track_reference(at(Vec3(3, 4, 1)), tp, 0.2, 5, std::nullopt);
    CHECK((res.trajectory.stages[0].position.head<2>() - Vec2(3, 4)).norm() <
          1e-12);
  }
  SUBCASE("invariant to radial distance, direction only") {
    tp.d_xy_track = 4.0;
    tp.d_z_track = 3.0;
    const auto a = track_reference(at(Vec3(3, 4, 2)), tp, 0.0, 5, std::nullopt);
    const auto b = track_reference(at(Vec3(30, 40, 2)), tp, 0.0, 5, std::nullopt);
    for (int i = 0; i <= 5; ++i) {
      CHECK((a.trajectory.stages[i].position - b.trajectory.stages[i].position)
                .norm() < 1e-12);
    }
  }
  SUBCASE("degenerate geometry holds the previous bearing") {
    tp.d_xy_track = 5.0;
    const auto res = track_reference(at(Vec3(1e-9, 0, 2)), tp, 0.0, 5,
                                     Vec2(0.6, 0.8));
    CHECK(res.trajectory.degenerate);
    CHECK((res.trajectory.stages[0].position.head<2>() - Vec2(3, 4)).norm() <
          1e-12);
  }
}

TEST_CASE("bias_heading") {
  LoiterParams lp;
  lp.bias_gain = 1.0;
  lp.bias_clamp = 0.3;
  SUBCASE("no detection is the identity") {
    CHECK(bias_heading(0.7, std::nullopt, 0.7, lp) == 0.7);
  }
  SUBCASE("dead-ahead detection is the identity") {
    plant::Detection det;
    det.bearing = 0.0;
    det.confidence = 0.9;
    CHECK(bias_heading(0.7, det, 0.7, lp) == doctest::Approx(0.7));
  }
  SUBCASE("stated law") {
    plant::Detection det;
    det.bearing = 0.5;  // yaw estimate aligned with psi -> error 0.5
    det.confidence = 0.4;
    CHECK(bias_heading(0.2, det, 0.2, lp) == doctest::Approx(0.4));
  }
  SUBCASE("clamp bounds the correction") {
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
      plant::Detection det;
      det.bearing = 4.0 * (rng.uniform() - 0.5);
      det.confidence = rng.uniform();
      const double psi = 6.0 * (rng.uniform() - 0.5);
      const double yaw = 6.0 * (rng.uniform() - 0.5);
      const double out = bias_heading(psi, det, yaw, lp);
      CHECK(std::abs(wrap_pi(out - psi)) <= lp.bias_clamp + 1e-12);
    }
  }
}

TEST_CASE("track_heading looks at the origin") {
  CHECK(track_heading(at(Vec3(-5, 0, 0))) == doctest::Approx(0.0));
  CHECK(track_heading(at(Vec3(0, -5, 0))) == doctest::Approx(M_PI / 2));
  CHECK(track_heading(at(Vec3(5, 0, 0))) == doctest::Approx(M_PI));
}

TEST_CASE("squared_distance_transform matches brute force") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 5 + static_cast<int>(rng.uniform() * 12);
    const int h = 4 + static_cast<int>(rng.uniform() * 10);
    std::vector<bool> mask(static_cast<std::size_t>(w) * h);
    for (auto&& m : mask) m = rng.uniform() < 0.7;
    const auto fast = squared_distance_transform(mask, w, h);
    const auto slow = brute_edt(mask, w, h);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) {
        CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("free_space_heading") {
  CameraModel cam;  // 31 x 21, forward
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.max_range = cam.max_range;
  img.ranges.assign(static_cast<std::size_t>(cam.width) * cam.height,
                    cam.max_range);

  SUBCASE("uniform free image keeps the heading") {
    const auto res = free_space_heading(img, cam, 0.4, 4.0);
    CHECK(!res.blocked);
    CHECK(res.azimuth == doctest::Approx(0.0));
    CHECK(res.psi == doctest::Approx(0.4));
  }
  SUBCASE("left half blocked steers right") {
    // Image-left columns (low c) are body-left (+azimuth); blocking them
    // pushes the free-space peak to negative azimuth.
    for (int r = 0; r < img.height; ++r) {
      for (int c = 0; c < img.width / 2; ++c) img.at(r, c) = 1.0;
    }
    const auto res = free_space_heading(img, cam, 0.0, 4.0);
    CHECK(!res.blocked);
    CHECK(res.azimuth != 0.0);
    // Free pixels are on image-right = negative body azimuth.
    CHECK(res.azimuth < 0.0);
  }
  SUBCASE("fully blocked raises the flag and holds") {
    img.ranges.assign(img.ranges.size(), 1.0);
    const auto res = free_space_heading(img, cam, 1.2, 4.0);
    CHECK(res.blocked);
    CHECK(res.psi == 1.2);
  }
  SUBCASE("azimuth within the half FOV") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
      for (auto& v : img.ranges) v = rng.uniform() < 0.5 ? 1.0 : cam.max_range;
      const auto res = free_space_heading(img, cam, 0.0, 4.0);
      if (!res.blocked) CHECK(std::abs(res.azimuth) < 0.5 * cam.hfov);
    }
  }
}
