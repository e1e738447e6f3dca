#include "relnav/plant/dynamics.hpp"

#include <stdexcept>

namespace relnav::plant {

Vec3 acceleration(const TrueState& s, double collective,
                  const QuadrotorParams& p) {
  const Vec3 thrust_dir = s.attitude.rotate(Vec3::UnitZ());
  return -kGravity * Vec3::UnitZ() + thrust_dir * (collective / p.mass) -
         (p.drag_coeff / p.mass) * s.velocity;
}

StateDerivative dynamics_derivative(const TrueState& s,
                                    const WrenchCommand& wrench,
                                    const QuadrotorParams& p) {
  StateDerivative d;
  d.p_dot = s.velocity;
  d.v_dot = acceleration(s, wrench.collective, p);
  const Vec3& w = s.angular_velocity;
  d.q_dot = s.attitude * Quat(0.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
  const Vec3 J = p.inertia_diag;
  const Vec3 Jw(J.x() * w.x(), J.y() * w.y(), J.z() * w.z());
  const Vec3 torque_net = wrench.torque - w.cross(Jw);
  d.w_dot = Vec3(torque_net.x() / J.x(), torque_net.y() / J.y(),
                 torque_net.z() / J.z());
  return d;
}

namespace {

TrueState apply(const TrueState& s, const StateDerivative& d, double h) {
  TrueState r;
  r.position = s.position + h * d.p_dot;
  r.velocity = s.velocity + h * d.v_dot;
  r.attitude = Quat(s.attitude.w + h * d.q_dot.w, s.attitude.x + h * d.q_dot.x,
                    s.attitude.y + h * d.q_dot.y, s.attitude.z + h * d.q_dot.z);
  r.angular_velocity = s.angular_velocity + h * d.w_dot;
  return r;
}

StateDerivative combine(const StateDerivative& k1, const StateDerivative& k2,
                        const StateDerivative& k3, const StateDerivative& k4) {
  StateDerivative d;
  d.p_dot = (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot) / 6.0;
  d.v_dot = (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot) / 6.0;
  d.q_dot = Quat((k1.q_dot.w + 2 * k2.q_dot.w + 2 * k3.q_dot.w + k4.q_dot.w) / 6.0,
                 (k1.q_dot.x + 2 * k2.q_dot.x + 2 * k3.q_dot.x + k4.q_dot.x) / 6.0,
                 (k1.q_dot.y + 2 * k2.q_dot.y + 2 * k3.q_dot.y + k4.q_dot.y) / 6.0,
                 (k1.q_dot.z + 2 * k2.q_dot.z + 2 * k3.q_dot.z + k4.q_dot.z) / 6.0);
  d.w_dot = (k1.w_dot + 2.0 * k2.w_dot + 2.0 * k3.w_dot + k4.w_dot) / 6.0;
  return d;
}

bool finite(const TrueState& s) {
  return s.position.allFinite() && s.velocity.allFinite() &&
         std::isfinite(s.attitude.w) && std::isfinite(s.attitude.x) &&
         std::isfinite(s.attitude.y) && std::isfinite(s.attitude.z) &&
         s.angular_velocity.allFinite();
}

}  // namespace

TrueState rk4_step(const TrueState& s, const WrenchCommand& w,
                   const QuadrotorParams& p, double dt) {
  const StateDerivative k1 = dynamics_derivative(s, w, p);
  const StateDerivative k2 = dynamics_derivative(apply(s, k1, 0.5 * dt), w, p);
  const StateDerivative k3 = dynamics_derivative(apply(s, k2, 0.5 * dt), w, p);
  const StateDerivative k4 = dynamics_derivative(apply(s, k3, dt), w, p);
  TrueState out = apply(s, combine(k1, k2, k3, k4), dt);
  out.attitude = out.attitude.normalized();
  if (!finite(out)) {
    throw std::runtime_error("step_dynamics: non-finite state");
  }
  return out;
}

TrueState step_dynamics_wrench(const TrueState& s, const WrenchCommand& w,
                               const QuadrotorParams& p, double dt) {
  if (!(dt > 0.0 && dt <= 0.05)) {
    throw std::invalid_argument("step_dynamics: dt must be in (0, 0.05]");
  }
  return rk4_step(s, w, p, dt);
}

TrueState step_dynamics(const TrueState& s, const Vec4& motor_thrusts,
                        const QuadrotorParams& p, double dt) {
  return step_dynamics_wrench(s, allocate(motor_thrusts, p), p, dt);
}

}  // namespace relnav::plant
