#include <doctest.h>

#include "relnav/core/rng.hpp"
#include "relnav/estimator/ukf.hpp"

using namespace relnav;
using namespace relnav::estimator;

namespace {

UkfConfig tight_config() {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(1e-12);
  return cfg;
}

EstimatorState hover_estimate(double z = 10.0) {
  EstimatorState x;
  x.p = Vec3(0, 0, z);
  return x;
}

double state_diff(const EstimatorState& a, const EstimatorState& b) {
  return boxminus(a, b).lpNorm<Eigen::Infinity>();
}

bool spd(const Cov& P) {
  if ((P - P.transpose()).lpNorm<Eigen::Infinity>() > 1e-10) return false;
  Eigen::SelfAdjointEigenSolver<Cov> es(P);
  return es.eigenvalues().minCoeff() > 1e-12;
}

}  // namespace

TEST_CASE("predict_loiter: hover IMU keeps the mean") {
  Ukf f(hover_estimate(), tight_config());
  const Vec3 accel(0, 0, kGravity);
  for (int i = 0; i < 20; ++i) f.predict_loiter(accel, Vec3::Zero(), 0.005);
  CHECK(state_diff(f.state(), hover_estimate()) < 1e-8);
}

TEST_CASE("predict_loiter: gravity-only kinematics") {
  Ukf f(hover_estimate(), tight_config());
  f.predict_loiter(Vec3::Zero(), Vec3::Zero(), 0.005);
  CHECK(f.state().v.z() == doctest::Approx(-kGravity * 0.005).epsilon(1e-9));
}

TEST_CASE("predict increases the covariance trace") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.01);
  Ukf f(hover_estimate(), cfg);
  const double tr0 = f.covariance().trace();
  f.predict_loiter(Vec3(0, 0, kGravity), Vec3::Zero(), 0.005);
  CHECK(f.covariance().trace() > tr0);
}

TEST_CASE("update with zero innovation keeps the mean, shrinks the trace") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.04);
  Ukf f(hover_estimate(12.0), cfg);
  const double tr0 = f.covariance().trace();
  const auto res = f.update_baro(12.0);  // h = p_z + bp = 12 exactly
  CHECK(res.applied);
  CHECK(state_diff(f.state(), hover_estimate(12.0)) < 1e-10);
  CHECK(f.covariance().trace() <= tr0 + 1e-12);
}

TEST_CASE("baro update matches a linear Kalman filter oracle") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.04);
  cfg.r_baro = 0.01;
  Ukf f(hover_estimate(12.0), cfg);
  f.update_baro(12.5);

  // Oracle: one linear KF update on the 16-dim error state with
  // H = d(p_z + bp)/dx.
  Eigen::Matrix<double, 1, 16> H = Eigen::Matrix<double, 1, 16>::Zero();
  H(0, 2) = 1.0;  // p_z
  H(0, 9) = 1.0;  // bp
  const Cov P0 = ErrVec::Constant(0.04).asDiagonal();
  const double S = (H * P0 * H.transpose())(0, 0) + cfg.r_baro;
  const Eigen::Matrix<double, 16, 1> K = P0 * H.transpose() / S;
  const Eigen::Matrix<double, 16, 1> dx = K * 0.5;  // innovation 0.5
  CHECK(f.state().p.z() == doctest::Approx(12.0 + dx(2)).epsilon(1e-9));
  CHECK(f.state().bp == doctest::Approx(dx(9)).epsilon(1e-9));
  const Cov P_oracle = (Cov::Identity() - K * H) * P0;
  CHECK((f.covariance() - P_oracle).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("velocity absence equals an infinite-noise velocity row") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.04);
  Ukf a(hover_estimate(12.0), cfg);
  a.update_loiter(12.4, std::nullopt);

  UkfConfig inf_cfg = cfg;
  inf_cfg.r_vel = 1e12;
  inf_cfg.gate_enabled = false;
  Ukf b(hover_estimate(12.0), inf_cfg);
  b.update_loiter(12.4, Vec3(0.3, -0.2, 0.1));

  CHECK(state_diff(a.state(), b.state()) < 1e-6);
}

TEST_CASE("predict_track: constant-velocity translation, no accel input") {
  UkfConfig cfg = tight_config();
  EstimatorState x = hover_estimate();
  x.v = Vec3(1, 0, 0);
  Ukf f(x, cfg);
  for (int i = 0; i < 5; ++i) f.predict_track(Vec3::Zero(), 0.02);
  CHECK((f.state().p - Vec3(0.1, 0, 10)).norm() < 1e-9);
  CHECK((f.state().v - Vec3(1, 0, 0)).norm() < 1e-9);
}

TEST_CASE("predict_track: velocity covariance grows at the configured PSD") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(1e-6);
  cfg.psd_vel_track = 2.0;
  Ukf f(hover_estimate(), cfg);
  const double v0 = f.covariance().block<3, 3>(3, 3).trace();
  const int steps = 100;
  const double dt = 0.005;
  for (int i = 0; i < steps; ++i) f.predict_track(Vec3::Zero(), dt);
  const double v1 = f.covariance().block<3, 3>(3, 3).trace();
  const double expected = 3.0 * cfg.psd_vel_track * steps * dt;
  CHECK(v1 - v0 == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("update_track convergence against a scalar KF oracle") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(1e-4);
  for (int i = 0; i < 3; ++i) cfg.init_cov_diag(i) = 25.0;  // sigma_init = 5 m
  cfg.r_det = 0.04;
  cfg.psd_vel_track = 2.0;
  EstimatorState x;
  x.p = Vec3(-6, 0, 2);
  Ukf f(x, cfg);

  // Per-axis oracle: 2-state (p, v) KF with position measurements.
  Eigen::Matrix2d Po;
  Po << 25.0, 0.0, 0.0, 1e-4;
  const double dt = 0.005;
  double below_time = -1.0;
  for (int k = 0; k < 400; ++k) {
    f.predict_track(Vec3::Zero(), dt);
    Eigen::Matrix2d A;
    A << 1, dt, 0, 1;
    Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
    Q(0, 0) = 1e-6 * dt;  // psd_pos
    Q(1, 1) = cfg.psd_vel_track * dt;
    Po = A * Po * A.transpose() + Q;
    if (k % 7 == 3) {  // ~30 Hz updates against the 200 Hz predicts
      f.update_target(x.p);
      const Eigen::Vector2d H(1, 0);
      const double S = Po(0, 0) + cfg.r_det;
      const Eigen::Vector2d K = Po * H / S;
      Po = (Eigen::Matrix2d::Identity() - K * H.transpose()) * Po;
    }
    const double pos_trace = f.covariance().block<3, 3>(0, 0).trace();
    if (below_time < 0 && pos_trace < 3.0 * cfg.r_det) below_time = k * dt;
    if (k == 399) {
      CHECK(f.covariance()(0, 0) == doctest::Approx(Po(0, 0)).epsilon(0.05));
    }
  }
  CHECK(below_time >= 0.0);
  CHECK(below_time < 1.0);
}

TEST_CASE("update_track gates an outlier") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.01);
  EstimatorState x;
  x.p = Vec3(-6, 0, 2);
  Ukf f(x, cfg);
  const Cov P_before = f.covariance();
  const auto res = f.update_target(Vec3(100, 0, 0));
  CHECK(!res.applied);
  CHECK((f.covariance() - P_before).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(state_diff(f.state(), x) == 0.0);
}

TEST_CASE("reanchor is a pure origin translation") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.5);
  EstimatorState x = hover_estimate();
  x.p = Vec3(3, -2, 7);
  Ukf f(x, cfg);
  const Cov P0 = f.covariance();

  f.reanchor(Vec3::Zero());
  CHECK(state_diff(f.state(), x) == 0.0);

  f.reanchor(x.p);
  CHECK(f.state().p.norm() == 0.0);
  CHECK((f.covariance() - P0).lpNorm<Eigen::Infinity>() == 0.0);

  Ukf g(x, cfg), h(x, cfg);
  g.reanchor(Vec3(1, 2, 3));
  g.reanchor(Vec3(-4, 0, 2));
  h.reanchor(Vec3(-3, 2, 5));
  CHECK(state_diff(g.state(), h.state()) < 1e-15);
}

TEST_CASE("confidence_trace uses the position+velocity block") {
  UkfConfig cfg;
  cfg.init_cov_diag.setOnes();
  Ukf f(hover_estimate(), cfg);
  CHECK(f.confidence_trace() == doctest::Approx(6.0));
  f.set_covariance(2.0 * Cov::Identity());
  CHECK(f.confidence_trace() == doctest::Approx(12.0));
  // A rejected outlier leaves it untouched.
  const double before = f.confidence_trace();
  f.update_target(Vec3(1e4, 0, 0));
  CHECK(f.confidence_trace() == before);
}

TEST_CASE("covariance stays symmetric positive definite") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.1);
  Ukf f(hover_estimate(12.0), cfg);
  Rng rng(5);
  for (int k = 0; k < 400; ++k) {
    const Vec3 accel(0.1 * rng.normal(), 0.1 * rng.normal(),
                     kGravity + 0.1 * rng.normal());
    const Vec3 gyro(0.05 * rng.normal(), 0.05 * rng.normal(),
                    0.05 * rng.normal());
    f.predict_loiter(accel, gyro, 0.005);
    if (k % 4 == 0) f.update_baro(12.0 + 0.1 * rng.normal());
    if (k % 7 == 0) {
      f.update_velocity(Vec3(0.1 * rng.normal(), 0.1 * rng.normal(),
                             0.1 * rng.normal()));
    }
    REQUIRE(spd(f.covariance()));
  }
}

TEST_CASE("zero-innovation update then predict commutes with predict alone") {
  UkfConfig cfg;
  cfg.init_cov_diag.setConstant(0.02);
  EstimatorState x = hover_estimate(12.0);
  x.v = Vec3(1, 0.5, 0);
  Ukf a(x, cfg), b(x, cfg);

  // a: update with exactly-consistent measurements, then predict.
  a.update_loiter(12.0, x.v);
  a.predict_loiter(Vec3(0, 0, kGravity), Vec3::Zero(), 0.005);
  // b: predict alone.
  b.predict_loiter(Vec3(0, 0, kGravity), Vec3::Zero(), 0.005);

  CHECK(state_diff(a.state(), b.state()) < 1e-6);
}
