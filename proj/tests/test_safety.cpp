#include <doctest.h>

#include <algorithm>

#include "relnav/core/rng.hpp"
#include "relnav/safety/cbf.hpp"

using namespace relnav;
using namespace relnav::safety;

namespace {

DepthImage uniform_image(const CameraModel& cam, double range) {
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.max_range = cam.max_range;
  img.ranges.assign(static_cast<std::size_t>(cam.width) * cam.height, range);
  return img;
}

}  // namespace

TEST_CASE("depth_to_points back-projection") {
  CameraModel cam;
  CbfConfig cfg;
  cfg.decimation = 1;
  cfg.cull_radius = 100.0;

  SUBCASE("all max range is empty") {
    const auto img = uniform_image(cam, cam.max_range);
    CHECK(depth_to_points(img, cam, Vec3::Zero(), Quat::identity(), cfg).empty());
  }
  SUBCASE("center pixel maps to the forward axis plus lever arm") {
    CameraModel cam2 = cam;
    cam2.lever_arm = Vec3(0.1, 0.0, -0.05);
    auto img = uniform_image(cam2, cam2.max_range);
    img.at(10, 15) = 4.0;
    const auto pts = depth_to_points(img, cam2, Vec3::Zero(), Quat::identity(), cfg);
    REQUIRE(pts.size() == 1);
    CHECK((pts[0].position - Vec3(4.1, 0.0, -0.05)).norm() < 1e-12);
    CHECK(pts[0].pixel_row == 10);
    CHECK(pts[0].pixel_col == 15);
  }
  SUBCASE("body yaw rotates the point") {
    CameraModel cam2 = cam;
    cam2.lever_arm = Vec3(0.1, 0.0, 0.0);
    auto img = uniform_image(cam2, cam2.max_range);
    img.at(10, 15) = 4.0;
    const auto pts = depth_to_points(img, cam2, Vec3::Zero(),
                                     yaw_to_quaternion(M_PI / 2), cfg);
    REQUIRE(pts.size() == 1);
    CHECK((pts[0].position - Vec3(0.0, 4.1, 0.0)).norm() < 1e-9);
  }
  SUBCASE("points beyond the cull radius are dropped") {
    CbfConfig tight = cfg;
    tight.cull_radius = 2.0;
    auto img = uniform_image(cam, cam.max_range);
    img.at(10, 15) = 4.0;
    CHECK(depth_to_points(img, cam, Vec3::Zero(), Quat::identity(), tight).empty());
  }
}

TEST_CASE("select_obstacles time-to-collision ranking") {
  CbfConfig cfg;
  cfg.r_safe = 1.0;
  cfg.k_points = 10;

  SUBCASE("head-on closing time") {
    std::vector<ObstaclePoint> pts(1);
    pts[0].position = Vec3(5, 0, 0);
    const auto sel = select_obstacles(pts, Vec3::Zero(), Vec3(2, 0, 0), cfg);
    REQUIRE(sel.size() == 1);
    CHECK(sel[0].ttc == doctest::Approx(2.0));
  }
  SUBCASE("receding point ranks last") {
    std::vector<ObstaclePoint> pts(2);
    pts[0].position = Vec3(-3, 0, 0);  // behind
    pts[1].position = Vec3(6, 0, 0);   // ahead
    const auto sel = select_obstacles(pts, Vec3::Zero(), Vec3(2, 0, 0), cfg);
    REQUIRE(sel.size() == 2);
    CHECK(sel[0].position.x() == 6.0);
    CHECK(sel[1].ttc > 30.0);  // closing speed clamped to epsilon
  }
  SUBCASE("K smallest against a brute-force sort oracle") {
    Rng rng(9);
    std::vector<ObstaclePoint> pts(15);
    for (auto& p : pts) {
      p.position = Vec3(6.0 * rng.uniform() + 1.0, 6.0 * (rng.uniform() - 0.5),
                        2.0 * (rng.uniform() - 0.5));
    }
    const Vec3 v(3, 0.5, 0);
    const auto sel = select_obstacles(pts, Vec3::Zero(), v, cfg);
    REQUIRE(sel.size() == 10);
    // Oracle: compute all ttc values, sort, compare the cut.
    std::vector<double> all;
    for (const auto& p : pts) {
      const double dist = p.position.norm();
      const double closing = std::max(cfg.min_closing_speed,
                                      v.dot(p.position) / dist);
      all.push_back(std::max(0.0, dist - cfg.r_safe) / closing);
    }
    std::sort(all.begin(), all.end());
    const double worst_selected =
        std::max_element(sel.begin(), sel.end(), [](auto& a, auto& b) {
          return a.ttc < b.ttc;
        })->ttc;
    CHECK(worst_selected <= all[9] + 1e-12);
  }
  SUBCASE("deterministic tie-break by pixel order") {
    std::vector<ObstaclePoint> pts(2);
    pts[0].position = Vec3(5, 0, 0);
    pts[0].pixel_row = 3;
    pts[1].position = Vec3(5, 0, 0);
    pts[1].pixel_row = 7;
    cfg.k_points = 1;
    const auto sel = select_obstacles(pts, Vec3::Zero(), Vec3(1, 0, 0), cfg);
    REQUIRE(sel.size() == 1);
    CHECK(sel[0].pixel_row == 3);
  }
}

TEST_CASE("cbf_terms closed forms") {
  CbfConfig cfg;
  cfg.r_safe = 1.0;
  cfg.lambda = 2.0;

  SUBCASE("barrier value") {
    const auto t = cbf_terms(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                             Vec3(2, 0, 0), cfg);
    CHECK(t.h == doctest::Approx(3.0));
  }
  SUBCASE("orthogonal velocity") {
    const Vec3 v(0, 3, 0);
    const auto t = cbf_terms(Vec3::Zero(), v, Vec3::Zero(), Vec3(2, 0, 0), cfg);
    CHECK(t.h_dot == doctest::Approx(0.0));
    CHECK(t.h_ddot == doctest::Approx(2.0 * v.squaredNorm()));
  }
  SUBCASE("boundary residual from the analytic substitution") {
    // On the boundary h = 0 and receding (h_dot > 0): residual = h_ddot +
    // 2*lambda*h_dot, nonnegative whenever h_ddot >= -2*lambda*h_dot.
    const Vec3 p(1, 0, 0), o(2, 0, 0);  // |p-o| = r_safe -> h = 0
    const Vec3 v(-1, 0, 0);             // receding: h_dot = 2(p-o).v = 2 > 0
    const Vec3 a(0, 0, 0);
    const auto t = cbf_terms(p, v, a, o, cfg);
    CHECK(t.h == doctest::Approx(0.0));
    CHECK(t.h_dot == doctest::Approx(2.0));
    CHECK(cbf_residual(t, cfg) ==
          doctest::Approx(t.h_ddot + 2.0 * cfg.lambda * t.h_dot));
    CHECK(cbf_residual(t, cfg) >= 0.0);
  }
}

TEST_CASE("cbf derivatives match finite differences along a trajectory") {
  CbfConfig cfg;
  cfg.r_safe = 0.8;
  cfg.lambda = 1.5;
  const Vec3 o(4, 1, 2);

  // Smooth synthetic trajectory with analytic derivatives.
  const auto pos = [](double t) {
    return Vec3(2.0 * t, std::sin(t), 1.0 + 0.5 * std::cos(t));
  };
  const auto vel = [](double t) {
    return Vec3(2.0, std::cos(t), -0.5 * std::sin(t));
  };
  const auto acc = [](double t) {
    return Vec3(0.0, -std::sin(t), -0.5 * std::cos(t));
  };
  const auto h_of = [&](double t) {
    return (pos(t) - o).squaredNorm() - cfg.r_safe * cfg.r_safe;
  };

  const double dt = 1e-5;
  for (double t = 0.1; t < 2.0; t += 0.17) {
    const auto terms = cbf_terms(pos(t), vel(t), acc(t), o, cfg);
    const double hdot_fd = (h_of(t + dt) - h_of(t - dt)) / (2 * dt);
    const double hddot_fd =
        (h_of(t + dt) - 2 * h_of(t) + h_of(t - dt)) / (dt * dt);
    CHECK(terms.h_dot == doctest::Approx(hdot_fd).epsilon(1e-4));
    CHECK(terms.h_ddot == doctest::Approx(hddot_fd).epsilon(1e-4));
  }
}
