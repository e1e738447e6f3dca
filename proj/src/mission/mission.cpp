#include "relnav/mission/mission.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relnav::mission {

std::optional<Mode> switch_decision(Mode mode, double trace, bool dwell_elapsed,
                                    const ModeSwitchConfig& cfg) {
  if (!dwell_elapsed) return std::nullopt;
  if (mode == Mode::Loiter && trace <= cfg.tau_up) return Mode::Track;
  if (mode == Mode::Track && trace >= cfg.tau_down) return Mode::Loiter;
  return std::nullopt;
}

MissionLoop::MissionLoop(const MissionConfig& cfg,
                         const plant::QuadrotorParams& params,
                         const plant::Environment& env,
                         const plant::SensorSuite& suite,
                         const plant::TrueState& start)
    : cfg_(cfg), params_(params), env_(env), suite_(suite), truth_(start) {
  if (cfg_.mode_switch.tau_up >= cfg_.mode_switch.tau_down) {
    throw std::invalid_argument("mission: tau_up must be < tau_down");
  }
  const double sub = cfg_.rates.plant_rate / cfg_.rates.control_rate;
  substeps_ = static_cast<int>(std::lround(sub));
  if (substeps_ < 1 || std::abs(sub - substeps_) > 1e-9) {
    throw std::invalid_argument(
        "mission: plant_rate must be an integer multiple of control_rate");
  }

  biases_.baro = suite_.baro_bias0;
  biases_.accel = suite_.accel_bias0;
  biases_.gyro = suite_.gyro_bias0;

  estimator::EstimatorState x0;
  x0.p = truth_.position;
  x0.v = truth_.velocity;
  x0.q = truth_.attitude;
  x0.bp = 0.0;
  x0.ba = Vec3::Zero();
  x0.bg = Vec3::Zero();
  ukf_ = std::make_unique<estimator::Ukf>(x0, cfg_.ukf);

  solver_ = std::make_unique<nmpc::NmpcSolver>(
      std::make_shared<nmpc::QuadModel>(params_), cfg_.nmpc);

  psi_loiter_ = cfg_.loiter.psi0;
  last_command_ = cfg_.nmpc.u_ref;
  last_wrench_ = plant::allocate(last_command_, params_);
}

void MissionLoop::refresh_constraints() {
  const DepthImage depth = plant::raycast_depth(truth_, env_, suite_);
  const auto& est = ukf_->state();
  const auto points = safety::depth_to_points(depth, suite_.camera, est.p,
                                              est.q, cfg_.cbf);
  constraint_points_ = safety::select_obstacles(points, est.p, est.v, cfg_.cbf);

  // FreeSpace heading policy is tied to the depth cadence.
  if (mode_ == Mode::Loiter &&
      cfg_.loiter.psi_policy == reference::HeadingPolicy::FreeSpace) {
    const auto fs = reference::free_space_heading(
        depth, suite_.camera, psi_loiter_, cfg_.free_space_range);
    psi_loiter_ = fs.psi;
  }
}

void MissionLoop::maybe_switch_mode(double trace) {
  const double t = cycle_ / cfg_.rates.control_rate;
  const bool dwell_ok = (t - last_transition_t_) >= cfg_.mode_switch.min_dwell_s;
  const auto next = switch_decision(mode_, trace, dwell_ok, cfg_.mode_switch);
  if (!next) return;

  if (*next == Mode::Track) {
    if (!shadow_) return;  // no target hypothesis to anchor to
    // Target position in the loiter frame. The shadow's baro bias already
    // carries the origin-altitude fold (set at spawn), so adopting its state
    // keeps the altitude update consistent in the new frame.
    const Vec3 o_loiter = ukf_->state().p - shadow_->state().p;
    z_fold_ = o_loiter.z();
    ukf_->set_state(shadow_->state());
    ukf_->set_covariance(shadow_->covariance());
    shadow_.reset();
    psi_track_ = reference::track_heading(ukf_->state());
    track_dir_.reset();
    // Constraint points move into the target-anchored frame.
    for (auto& pt : constraint_points_) pt.position -= o_loiter;
    mode_ = Mode::Track;
  } else {
    // Back to a loiter frame anchored at the current vehicle horizontal
    // position; altitude fold-back restores the baro-consistent origin.
    estimator::EstimatorState x = ukf_->state();
    const Vec3 shift(x.p.x(), x.p.y(), -z_fold_);
    x.p = Vec3(0.0, 0.0, x.p.z() + z_fold_);
    x.bp -= z_fold_;
    ukf_->set_state(x);
    for (auto& pt : constraint_points_) pt.position -= shift;
    // Position knowledge relative to the new anchor: re-inflate to initial
    // values and cut cross-covariance, the target-relative information is
    // meaningless in the loiter frame.
    estimator::Cov P = ukf_->covariance();
    P.block<3, 16>(0, 0).setZero();
    P.block<16, 3>(0, 0).setZero();
    for (int i = 0; i < 3; ++i) P(i, i) = cfg_.ukf.init_cov_diag(i);
    ukf_->set_covariance(P);
    psi_loiter_ = quaternion_to_yaw(ukf_->state().q);
    z_fold_ = 0.0;
    mode_ = Mode::Loiter;
  }
  solver_->reset_warm_start();
  ++transitions_;
  last_transition_t_ = t;
}

CycleRecord MissionLoop::step() {
  const double dt_c = 1.0 / cfg_.rates.control_rate;
  const double t = cycle_ / cfg_.rates.control_rate;
  constexpr double kSchedEps = 1e-9;

  CycleRecord rec;
  rec.t = t;
  rec.cycle = cycle_;

  // True biases random-walk at the control rate.
  biases_ = plant::step_biases(biases_, suite_, dt_c, cycle_);

  // IMU reflects the wrench applied over the previous interval (ZOH).
  const Vec3 accel_world =
      plant::acceleration(truth_, last_wrench_.collective, params_);
  const plant::ImuSample imu =
      plant::sense_imu(truth_, accel_world, biases_, suite_, cycle_);

  // Estimator predict with the mode-specific process model.
  if (cycle_ > 0) {
    if (mode_ == Mode::Loiter) {
      ukf_->predict_loiter(imu.accel, imu.gyro, dt_c);
    } else {
      ukf_->predict_track(imu.gyro, dt_c);
    }
    if (shadow_) shadow_->predict_track(imu.gyro, dt_c);
  }

  // Measurement updates on their own cadences.
  if (t + kSchedEps >= next_baro_t_) {
    next_baro_t_ += 1.0 / cfg_.rates.baro_rate;
    const double z = plant::sense_baro(truth_, biases_, suite_, cycle_);
    if (mode_ == Mode::Loiter || cfg_.baro_update_in_track) {
      ukf_->update_baro(z);
    }
    if (shadow_) shadow_->update_baro(z);
  }
  if (t + kSchedEps >= next_vel_t_) {
    next_vel_t_ += 1.0 / cfg_.rates.velocity_rate;
    if (mode_ == Mode::Loiter) {
      const auto v = plant::sense_velocity(truth_, suite_, cycle_);
      if (v) {
        ukf_->update_velocity(*v);
        // The shadow's velocity is target-relative; for the pre-switch
        // hypothesis the target is treated as quasi-static, so the vehicle
        // velocity still applies.
        if (shadow_) shadow_->update_velocity(*v);
      }
    }
  }

  std::optional<plant::Detection> det;
  if (t + kSchedEps >= next_det_t_) {
    next_det_t_ += 1.0 / cfg_.rates.detector_rate;
    det = plant::detect_target(truth_, env_, suite_, cycle_, t);
    last_detection_ = det;
    if (det) {
      last_detection_t_ = t;
      const double conf = std::max(det->confidence, cfg_.detection_conf_floor);
      const double scale =
          (suite_.detector_c_max / conf) * (suite_.detector_c_max / conf);
      const Vec3 z = -det->relative_position;  // vehicle w.r.t. target
      if (mode_ == Mode::Track) {
        ukf_->update_target(z, scale);
      } else {
        if (!shadow_) {
          estimator::EstimatorState xs = ukf_->state();
          xs.p = z;
          // Fold the hypothesized target altitude into the baro bias so the
          // shadow's altitude update stays consistent in its own frame.
          xs.bp = ukf_->state().bp + (ukf_->state().p.z() - xs.p.z());
          shadow_ = std::make_unique<estimator::Ukf>(xs, cfg_.ukf);
          estimator::Cov P = ukf_->covariance();
          P.block<3, 16>(0, 0).setZero();
          P.block<16, 3>(0, 0).setZero();
          const double s2 = cfg_.shadow_pos_sigma0 * cfg_.shadow_pos_sigma0;
          for (int i = 0; i < 3; ++i) P(i, i) = s2;
          shadow_->set_covariance(P);
        } else {
          shadow_->update_target(z, scale);
        }
      }
    }
  }
  // A stale shadow hypothesis decays until it is useless; drop it.
  if (shadow_ && shadow_->confidence_trace() > cfg_.mode_switch.tau_down) {
    shadow_.reset();
  }

  const double trace =
      (mode_ == Mode::Track)
          ? ukf_->confidence_trace()
          : (shadow_ ? shadow_->confidence_trace()
                     : std::numeric_limits<double>::infinity());
  rec.trace = trace;

  maybe_switch_mode(trace);

  // Heading policy.
  if (mode_ == Mode::Loiter) {
    if (cfg_.loiter.psi_policy == reference::HeadingPolicy::DetectionBiased &&
        det) {
      psi_loiter_ = reference::bias_heading(
          psi_loiter_, det, quaternion_to_yaw(ukf_->state().q), cfg_.loiter);
    }
  } else {
    psi_track_ = reference::track_heading(ukf_->state());
  }

  // Constraint snapshot at the CBF cadence (also drives FreeSpace heading).
  if (t + kSchedEps >= next_cbf_t_) {
    next_cbf_t_ += 1.0 / cfg_.rates.cbf_rate;
    refresh_constraints();
  }

  // Reference rollout.
  reference::ReferenceTrajectory ref;
  if (mode_ == Mode::Loiter) {
    ref = reference::loiter_reference(ukf_->state(), cfg_.loiter, psi_loiter_,
                                      cfg_.nmpc.horizon, cfg_.nmpc.dt);
    rec.psi_ref = psi_loiter_;
  } else {
    auto tr = reference::track_reference(ukf_->state(), cfg_.track, psi_track_,
                                         cfg_.nmpc.horizon, track_dir_);
    track_dir_ = tr.direction;
    ref = std::move(tr.trajectory);
    rec.psi_ref = psi_track_;
  }

  // NMPC solve.
  nmpc::State x0;
  x0.position = ukf_->state().p;
  x0.velocity = ukf_->state().v;
  x0.attitude = ukf_->state().q;
  x0.angular_velocity = imu.gyro - ukf_->state().bg;
  const nmpc::NmpcSolution sol =
      solver_->solve(x0, ref, constraint_points_, cfg_.cbf);

  Vec4 command;
  if (sol.status == nmpc::SolveStatus::Degenerate) {
    command = last_command_;
    rec.fault = true;
  } else {
    command = sol.inputs[0];
  }
  last_command_ = command;

  // Record.
  rec.mode = mode_;
  rec.p_true = truth_.position;
  rec.v_true = truth_.velocity;
  rec.q_true = truth_.attitude;
  rec.w_true = truth_.angular_velocity;
  rec.target_true = env_.target.position;
  rec.p_est = ukf_->state().p;
  rec.v_est = ukf_->state().v;
  rec.q_est = ukf_->state().q;
  rec.bp_est = ukf_->state().bp;
  rec.ref_p0 = ref.stages[0].position;
  rec.ref_v0 = ref.stages[0].velocity;
  rec.ref_q0 = ref.stages[0].attitude;
  rec.command = command;
  rec.solver_iterations = sol.iterations;
  rec.qp_iterations = sol.qp_iterations;
  rec.kkt_residual = sol.kkt_residual;
  rec.solver_status = static_cast<int>(sol.status);
  rec.max_slack = sol.max_slack;
  rec.solve_wall_ms = sol.wall_time * 1e3;
  rec.n_constraint_points = static_cast<int>(constraint_points_.size());
  double min_h = std::numeric_limits<double>::infinity();
  for (const auto& pt : constraint_points_) {
    const auto terms = safety::cbf_terms(ukf_->state().p, ukf_->state().v,
                                         Vec3::Zero(), pt.position, cfg_.cbf);
    min_h = std::min(min_h, terms.h);
  }
  rec.min_h = constraint_points_.empty() ? 0.0 : min_h;
  rec.min_clearance_true =
      env_.spheres.empty() && env_.cylinders.empty()
          ? std::numeric_limits<double>::infinity()
          : plant::obstacle_clearance(truth_.position, env_);
  rec.detection_present = det.has_value();
  if (det) {
    rec.det_rel = det->relative_position;
    rec.det_conf = det->confidence;
    rec.det_bearing = det->bearing;
  }

  // Plant stepping with zero-order hold on the command.
  last_wrench_ = plant::allocate(command, params_);
  rec.command_saturated = last_wrench_.saturated;
  const double dt_p = 1.0 / cfg_.rates.plant_rate;
  for (int i = 0; i < substeps_; ++i) {
    truth_ = plant::step_dynamics_wrench(truth_, last_wrench_, params_, dt_p);
    env_.target = plant::step_target(env_.target, dt_p);
  }

  ++cycle_;
  return rec;
}

void MissionLoop::run(const std::function<void(const CycleRecord&)>& sink) {
  const auto n_cycles =
      static_cast<std::int64_t>(std::llround(cfg_.duration_s * cfg_.rates.control_rate));
  for (std::int64_t i = 0; i < n_cycles; ++i) sink(step());
}

}  // namespace relnav::mission
