#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "relnav/estimator/ukf.hpp"
#include "relnav/nmpc/solver.hpp"
#include "relnav/plant/dynamics.hpp"
#include "relnav/plant/environment.hpp"
#include "relnav/plant/sensors.hpp"
#include "relnav/reference/free_space.hpp"
#include "relnav/reference/reference.hpp"
#include "relnav/safety/cbf.hpp"

namespace relnav::mission {

enum class Mode { Loiter, Track };

struct ModeSwitchConfig {
  double tau_up{1.5};    // loiter -> track when trace <= tau_up
  double tau_down{8.0};  // track -> loiter when trace >= tau_down
  double min_dwell_s{0.5};
};

struct RateConfig {
  double plant_rate{1000.0};
  double control_rate{200.0};
  double cbf_rate{60.0};
  double detector_rate{30.0};
  double baro_rate{50.0};
  double velocity_rate{30.0};
};

/// Pure hysteresis decision: a transition fires only when the threshold is
/// crossed and the dwell time has elapsed.
std::optional<Mode> switch_decision(Mode mode, double trace, bool dwell_elapsed,
                                    const ModeSwitchConfig& cfg);

struct MissionConfig {
  RateConfig rates;
  reference::LoiterParams loiter;
  reference::TrackParams track;
  ModeSwitchConfig mode_switch;
  estimator::UkfConfig ukf;
  nmpc::NmpcConfig nmpc;
  safety::CbfConfig cbf;
  double duration_s{60.0};
  bool baro_update_in_track{true};
  double detection_conf_floor{0.05};  // confidence clamp for noise scaling
  double free_space_range{3.0};       // m, depth threshold for FreeSpace policy
  double shadow_pos_sigma0{5.0};      // m, shadow filter initial position sigma
  double shadow_timeout_s{1.5};       // drop the target hypothesis after this
};

/// One control-cycle record; everything the metrics and plots need.
/// solve_wall_ms is wall-clock and is serialized separately from the
/// deterministic log stream.
struct CycleRecord {
  double t{0.0};
  std::int64_t cycle{0};
  Mode mode{Mode::Loiter};

  Vec3 p_true{Vec3::Zero()}, v_true{Vec3::Zero()};
  Quat q_true{};
  Vec3 w_true{Vec3::Zero()};
  Vec3 target_true{Vec3::Zero()};

  Vec3 p_est{Vec3::Zero()}, v_est{Vec3::Zero()};
  Quat q_est{};
  double bp_est{0.0};
  double trace{0.0};

  double psi_ref{0.0};
  Vec3 ref_p0{Vec3::Zero()}, ref_v0{Vec3::Zero()};
  Quat ref_q0{};

  Vec4 command{Vec4::Zero()};
  bool command_saturated{false};
  int solver_iterations{0};
  int qp_iterations{0};
  double kkt_residual{0.0};
  int solver_status{0};  // 0 converged, 1 max-iter, 2 degenerate
  double max_slack{0.0};
  double solve_wall_ms{0.0};

  double min_h{0.0};
  double min_clearance_true{0.0};
  int n_constraint_points{0};

  bool detection_present{false};
  Vec3 det_rel{Vec3::Zero()};
  double det_conf{0.0};
  double det_bearing{0.0};

  bool fault{false};
};

/// Deterministic fixed-step closed loop: plant at the plant rate, control at
/// the control rate, CBF/detector/baro/velocity on their own cadences.
class MissionLoop {
 public:
  MissionLoop(const MissionConfig& cfg, const plant::QuadrotorParams& params,
              const plant::Environment& env, const plant::SensorSuite& suite,
              const plant::TrueState& start);

  CycleRecord step();
  void run(const std::function<void(const CycleRecord&)>& sink);

  Mode mode() const { return mode_; }
  int transitions() const { return transitions_; }
  const estimator::Ukf& ukf() const { return *ukf_; }
  const plant::TrueState& truth() const { return truth_; }
  double psi_loiter() const { return psi_loiter_; }

 private:
  void refresh_constraints();
  void maybe_switch_mode(double trace);

  MissionConfig cfg_;
  plant::QuadrotorParams params_;
  plant::Environment env_;
  plant::SensorSuite suite_;

  plant::TrueState truth_;
  plant::SensorBiases biases_;
  plant::WrenchCommand last_wrench_;

  std::unique_ptr<estimator::Ukf> ukf_;
  std::unique_ptr<estimator::Ukf> shadow_;
  std::unique_ptr<nmpc::NmpcSolver> solver_;

  Mode mode_{Mode::Loiter};
  double psi_loiter_{0.0};
  double psi_track_{0.0};
  std::optional<Vec2> track_dir_;
  double z_fold_{0.0};  // target-origin altitude folded into the baro bias

  std::vector<safety::ObstaclePoint> constraint_points_;
  std::optional<plant::Detection> last_detection_;
  double last_detection_t_{-1e18};
  Vec4 last_command_{Vec4::Zero()};

  std::int64_t cycle_{0};
  double last_transition_t_{-1e18};
  int transitions_{0};
  int substeps_{5};
  double next_cbf_t_{0.0};
  double next_det_t_{0.0};
  double next_baro_t_{0.0};
  double next_vel_t_{0.0};
};

}  // namespace relnav::mission
