#pragma once

#include <functional>
#include <optional>

#include "relnav/core/quaternion.hpp"

namespace relnav::estimator {

/// Error-state dimension: p(3) v(3) dtheta(3) b_p(1) b_a(3) b_g(3).
inline constexpr int kErrDim = 16;
using Cov = Eigen::Matrix<double, kErrDim, kErrDim>;
using ErrVec = Eigen::Matrix<double, kErrDim, 1>;

/// Filter mean. Position/velocity are relative to the active frame origin
/// (loiter anchor or target); attitude maps body to frame axes.
struct EstimatorState {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Quat q{};
  double bp{0.0};          // barometer bias [m]
  Vec3 ba{Vec3::Zero()};   // accelerometer bias [m/s^2]
  Vec3 bg{Vec3::Zero()};   // gyroscope bias [rad/s]
};

EstimatorState boxplus(const EstimatorState& x, const ErrVec& d);
ErrVec boxminus(const EstimatorState& a, const EstimatorState& b);

struct UkfConfig {
  // Merwe scaled sigma-point parameters.
  double alpha{0.3};
  double beta{2.0};
  double kappa{0.0};

  // Continuous process-noise PSDs, discretized as psd * dt per step.
  double psd_pos{1e-6};        // m^2/s
  double psd_vel{4e-4};        // m^2/s^3 (loiter; accel noise density^2)
  double psd_att{1e-6};        // rad^2/s (gyro noise density^2)
  double psd_bp{1e-6};         // m^2/s
  double psd_ba{1e-8};         // (m/s^2)^2/s
  double psd_bg{1e-12};        // (rad/s)^2/s
  double psd_vel_track{2.0};   // m^2/s^3, unknown relative acceleration

  // Measurement noise variances.
  double r_baro{0.01};         // m^2
  double r_vel{0.01};          // (m/s)^2 per axis
  double r_det{0.0225};        // m^2 per axis

  bool gate_enabled{true};
  ErrVec init_cov_diag{ErrVec::Ones()};
};

struct UpdateResult {
  bool applied{false};
  double mahalanobis{0.0};
};

/// Unscented Kalman filter over the 16-dim error state with multiplicative
/// attitude error. Process and measurement models are mode-specific; the
/// caller picks predict_loiter/predict_track and the relevant updates.
class Ukf {
 public:
  Ukf(const EstimatorState& x0, const UkfConfig& cfg);

  const EstimatorState& state() const { return x_; }
  const Cov& covariance() const { return P_; }
  void set_state(const EstimatorState& x) { x_ = x; }
  void set_covariance(const Cov& P);

  /// IMU-driven inertial kinematics; biases random-walk.
  void predict_loiter(const Vec3& accel, const Vec3& gyro, double dt);

  /// Gyro-only attitude, constant-velocity translation with elevated process
  /// noise (no assumption on the target's motion).
  void predict_track(const Vec3& gyro, double dt);

  UpdateResult update_baro(double z);
  UpdateResult update_velocity(const Vec3& z);
  /// Combined loiter update; the velocity row is skipped when absent.
  void update_loiter(double baro, const std::optional<Vec3>& velocity);
  /// Target-relative position update; noise_scale inflates r_det (used for
  /// confidence-dependent detection quality).
  UpdateResult update_target(const Vec3& z, double noise_scale = 1.0);

  /// Pure translation of the frame origin: p -= offset, everything else
  /// (including covariance) unchanged.
  void reanchor(const Vec3& offset);

  /// Trace of the position+velocity covariance block. Bias blocks are
  /// excluded: they never shrink from detections and would poison the
  /// mode-switching signal.
  double confidence_trace() const;

  /// Barometer-bias accessor used when the frame origin moves vertically.
  void shift_baro_bias(double delta) { x_.bp += delta; }

 private:
  void predict(const Vec3& accel, const Vec3& gyro, double dt, bool use_accel);
  UpdateResult update(const Eigen::VectorXd& z,
                      const Eigen::MatrixXd& noise,
                      double gate_threshold,
                      const std::function<Eigen::VectorXd(const EstimatorState&)>& h);
  void enforce_spd();

  EstimatorState x_;
  Cov P_;
  UkfConfig cfg_;
};

}  // namespace relnav::estimator
