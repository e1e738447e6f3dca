#include "relnav/reference/reference.hpp"

namespace relnav::reference {

namespace {

void fill_velocities(ReferenceTrajectory& traj, double dt) {
  const std::size_t n = traj.stages.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    traj.stages[i].velocity =
        (traj.stages[i + 1].position - traj.stages[i].position) / dt;
  }
  if (n >= 2) traj.stages[n - 1].velocity = traj.stages[n - 2].velocity;
}

}  // namespace

ReferenceTrajectory loiter_reference(const estimator::EstimatorState& x,
                                     const LoiterParams& lp, double psi, int N,
                                     double dt) {
  ReferenceTrajectory traj;
  traj.stages.resize(N + 1);
  const Quat q_ref = yaw_to_quaternion(psi);
  const double c = std::cos(psi), s = std::sin(psi);
  for (int i = 0; i <= N; ++i) {
    const double adv = i * lp.v_loiter * dt;
    Stage& st = traj.stages[i];
    st.position = Vec3(x.p.x() + adv * c, x.p.y() + adv * s, lp.p_z_loiter);
    st.attitude = q_ref;
    st.frame.kind = FrameKind::RelativeLoiter;
  }
  fill_velocities(traj, dt);
  return traj;
}

TrackReferenceResult track_reference(const estimator::EstimatorState& x,
                                     const TrackParams& tp, double psi_track,
                                     int N,
                                     const std::optional<Vec2>& prev_direction) {
  constexpr double kEps = 1e-6;
  TrackReferenceResult out;
  const double hor = std::hypot(x.p.x(), x.p.y());
  Vec2 dir;
  bool degenerate = false;
  if (hor > kEps) {
    dir = Vec2(x.p.x(), x.p.y()) / hor;
  } else if (prev_direction) {
    dir = *prev_direction;
    degenerate = true;
  } else {
    dir = Vec2(1.0, 0.0);
    degenerate = true;
  }
  const Vec3 hold(dir.x() * tp.d_xy_track, dir.y() * tp.d_xy_track,
                  tp.d_z_track);
  out.trajectory.stages.resize(N + 1);
  const Quat q_ref = yaw_to_quaternion(psi_track);
  for (int i = 0; i <= N; ++i) {
    Stage& st = out.trajectory.stages[i];
    st.position = hold;
    st.attitude = q_ref;
    st.frame.kind = FrameKind::RelativeTrack;
    st.velocity = Vec3::Zero();
  }
  out.trajectory.degenerate = degenerate;
  out.direction = dir;
  return out;
}

double bias_heading(double psi, const std::optional<plant::Detection>& det,
                    double yaw_estimate, const LoiterParams& lp) {
  if (!det) return psi;
  // Bearing error between the detection direction and the reference heading.
  const double err = wrap_pi(yaw_estimate + det->bearing - psi);
  const double correction = std::clamp(lp.bias_gain * det->confidence * err,
                                       -lp.bias_clamp, lp.bias_clamp);
  return wrap_pi(psi + correction);
}

double track_heading(const estimator::EstimatorState& x) {
  return std::atan2(-x.p.y(), -x.p.x());
}

}  // namespace relnav::reference
