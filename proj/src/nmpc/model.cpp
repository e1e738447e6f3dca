#include "relnav/nmpc/model.hpp"

namespace relnav::nmpc {

namespace {

using Mat13 = Eigen::Matrix<double, 13, 13>;
using Mat13x4 = Eigen::Matrix<double, 13, 4>;

// Ambient layout: p(0:3) v(3:6) q(6:10) w(10:13).

Eigen::Matrix<double, 4, 3> embed_vector() {
  Eigen::Matrix<double, 4, 3> H = Eigen::Matrix<double, 4, 3>::Zero();
  H.bottomRows<3>().setIdentity();
  return H;
}

// d(R(q) e_z)/dq for the implemented rotate(): rows x,y,z; cols w,x,y,z.
Eigen::Matrix<double, 3, 4> thrust_dir_jacobian(const Quat& q) {
  Eigen::Matrix<double, 3, 4> J;
  J << 2 * q.y, 2 * q.z, 2 * q.w, 2 * q.x,
      -2 * q.x, -2 * q.w, 2 * q.z, 2 * q.y,
      0.0, -4 * q.x, -4 * q.y, 0.0;
  return J;
}

// Torque mixer rows (3x4) for the X configuration, matching plant::allocate.
Eigen::Matrix<double, 3, 4> torque_mixer(const plant::QuadrotorParams& p) {
  const double d = p.moment_arm();
  Eigen::Matrix<double, 3, 4> M;
  M << -d, d, d, -d,
      -d, d, -d, d,
      p.torque_coeff, p.torque_coeff, -p.torque_coeff, -p.torque_coeff;
  return M;
}

// Continuous-time ambient Jacobians dF/dx (13x13) and dF/du (13x4).
void continuous_jacobians(const State& s, const Vec4& u,
                          const plant::QuadrotorParams& p, Mat13& F,
                          Mat13x4& G) {
  F.setZero();
  G.setZero();
  const double T = u.sum();
  const Vec3& w = s.angular_velocity;

  F.block<3, 3>(0, 3).setIdentity();  // dp/dv

  F.block<3, 3>(3, 3) = -(p.drag_coeff / p.mass) * Mat3::Identity();
  F.block<3, 4>(3, 6) = (T / p.mass) * thrust_dir_jacobian(s.attitude);

  const Quat w_quat(0.0, w.x(), w.y(), w.z());
  F.block<4, 4>(6, 6) = 0.5 * quat_mat_right(w_quat);
  F.block<4, 3>(6, 10) = 0.5 * quat_mat_left(s.attitude) * embed_vector();

  const Vec3 J = p.inertia_diag;
  const Vec3 Jw(J.x() * w.x(), J.y() * w.y(), J.z() * w.z());
  Mat3 wdot_dw = -skew(w) * J.asDiagonal();
  wdot_dw += skew(Jw);
  F.block<3, 3>(10, 10) = J.cwiseInverse().asDiagonal() * wdot_dw;

  const Vec3 thrust_dir = s.attitude.rotate(Vec3::UnitZ());
  G.block<3, 4>(3, 0) = (thrust_dir / p.mass) * Eigen::RowVector4d::Ones();
  G.block<3, 4>(10, 0) = J.cwiseInverse().asDiagonal() * torque_mixer(p);
}

Eigen::Matrix<double, 13, 1> ambient_derivative(const State& s, const Vec4& u,
                                                const plant::QuadrotorParams& p) {
  const plant::StateDerivative d =
      plant::dynamics_derivative(s, plant::allocate(u, p), p);
  Eigen::Matrix<double, 13, 1> out;
  out.segment<3>(0) = d.p_dot;
  out.segment<3>(3) = d.v_dot;
  out.segment<4>(6) = d.q_dot.coeffs();
  out.segment<3>(10) = d.w_dot;
  return out;
}

State from_ambient(const Eigen::Matrix<double, 13, 1>& a) {
  State s;
  s.position = a.segment<3>(0);
  s.velocity = a.segment<3>(3);
  s.attitude = Quat(a(6), a(7), a(8), a(9));
  s.angular_velocity = a.segment<3>(10);
  return s;
}

Eigen::Matrix<double, 13, 1> to_ambient(const State& s) {
  Eigen::Matrix<double, 13, 1> a;
  a.segment<3>(0) = s.position;
  a.segment<3>(3) = s.velocity;
  a.segment<4>(6) = s.attitude.coeffs();
  a.segment<3>(10) = s.angular_velocity;
  return a;
}

// Lift from the 12-dim error state to the 13-dim ambient tangent at x.
Eigen::Matrix<double, 13, 12> tangent_lift(const Quat& q) {
  Eigen::Matrix<double, 13, 12> T = Eigen::Matrix<double, 13, 12>::Zero();
  T.block<3, 3>(0, 0).setIdentity();
  T.block<3, 3>(3, 3).setIdentity();
  T.block<4, 3>(6, 6) = 0.5 * quat_mat_left(q) * embed_vector();
  T.block<3, 3>(10, 9).setIdentity();
  return T;
}

// Projection from the ambient tangent at x back to the 12-dim error state.
Eigen::Matrix<double, 12, 13> tangent_project(const Quat& q) {
  Eigen::Matrix<double, 12, 13> P = Eigen::Matrix<double, 12, 13>::Zero();
  P.block<3, 3>(0, 0).setIdentity();
  P.block<3, 3>(3, 3).setIdentity();
  P.block<3, 4>(6, 6) =
      2.0 * embed_vector().transpose() * quat_mat_left(q).transpose();
  P.block<3, 3>(9, 10).setIdentity();
  return P;
}

}  // namespace

std::vector<State> rollout(const DynamicsModel& model, const State& x0,
                           const std::vector<Vec4>& inputs, double dt) {
  std::vector<State> out;
  out.reserve(inputs.size() + 1);
  out.push_back(x0);
  for (const auto& u : inputs) out.push_back(model.step(out.back(), u, dt));
  return out;
}

State state_boxplus(const State& x, const ErrVec& d) {
  State out;
  out.position = x.position + d.segment<3>(0);
  out.velocity = x.velocity + d.segment<3>(3);
  out.attitude = quat_boxplus(x.attitude, d.segment<3>(6));
  out.angular_velocity = x.angular_velocity + d.segment<3>(9);
  return out;
}

ErrVec state_boxminus(const State& a, const State& b) {
  ErrVec d;
  d.segment<3>(0) = a.position - b.position;
  d.segment<3>(3) = a.velocity - b.velocity;
  d.segment<3>(6) = quat_boxminus(a.attitude, b.attitude);
  d.segment<3>(9) = a.angular_velocity - b.angular_velocity;
  return d;
}

State QuadModel::step(const State& x, const Vec4& u, double dt) const {
  // Single RK4 step at the shooting interval; identical arithmetic to the
  // plant integrator at matching dt.
  return plant::rk4_step(x, plant::allocate(u, params_), params_, dt);
}

void QuadModel::jacobians(const State& x, const Vec4& u, double dt, MatA& A,
                          MatB& B) const {
  // RK4 stage chain in ambient coordinates.
  const Eigen::Matrix<double, 13, 1> x0 = to_ambient(x);

  Mat13 F1, F2, F3, F4;
  Mat13x4 G1, G2, G3, G4;

  const Eigen::Matrix<double, 13, 1> k1 = ambient_derivative(x, u, params_);
  continuous_jacobians(x, u, params_, F1, G1);

  const State s2 = from_ambient(x0 + 0.5 * dt * k1);
  const Eigen::Matrix<double, 13, 1> k2 = ambient_derivative(s2, u, params_);
  continuous_jacobians(s2, u, params_, F2, G2);

  const State s3 = from_ambient(x0 + 0.5 * dt * k2);
  const Eigen::Matrix<double, 13, 1> k3 = ambient_derivative(s3, u, params_);
  continuous_jacobians(s3, u, params_, F3, G3);

  const State s4 = from_ambient(x0 + dt * k3);
  const Eigen::Matrix<double, 13, 1> k4 = ambient_derivative(s4, u, params_);
  continuous_jacobians(s4, u, params_, F4, G4);

  const Mat13 I = Mat13::Identity();
  const Mat13 D1 = F1;
  const Mat13x4 E1 = G1;
  const Mat13 D2 = F2 * (I + 0.5 * dt * D1);
  const Mat13x4 E2 = F2 * (0.5 * dt * E1) + G2;
  const Mat13 D3 = F3 * (I + 0.5 * dt * D2);
  const Mat13x4 E3 = F3 * (0.5 * dt * E2) + G3;
  const Mat13 D4 = F4 * (I + dt * D3);
  const Mat13x4 E4 = F4 * (dt * E3) + G4;

  Mat13 A_amb = I + (dt / 6.0) * (D1 + 2.0 * D2 + 2.0 * D3 + D4);
  Mat13x4 B_amb = (dt / 6.0) * (E1 + 2.0 * E2 + 2.0 * E3 + E4);

  // Renormalization of the quaternion block.
  const Eigen::Matrix<double, 13, 1> x_raw =
      x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const Vec4 q_raw = x_raw.segment<4>(6);
  const double qn = q_raw.norm();
  const Vec4 q_hat = q_raw / qn;
  const Mat4 N = (Mat4::Identity() - q_hat * q_hat.transpose()) / qn;
  A_amb.middleRows<4>(6) = N * A_amb.middleRows<4>(6);
  B_amb.middleRows<4>(6) = N * B_amb.middleRows<4>(6);

  const Quat q_out(q_hat(0), q_hat(1), q_hat(2), q_hat(3));
  A = tangent_project(q_out) * A_amb * tangent_lift(x.attitude);
  B = tangent_project(q_out) * B_amb;
}

Vec3 QuadModel::acceleration(const State& x, const Vec4& u) const {
  return plant::acceleration(x, u.sum(), params_);
}

void QuadModel::accel_jacobian(const State& x, const Vec4& u,
                               Eigen::Matrix<double, 3, kErrDim>& Jx,
                               Eigen::Matrix<double, 3, kInputDim>& Ju) const {
  Jx.setZero();
  const double T = u.sum();
  Jx.block<3, 3>(0, 3) = -(params_.drag_coeff / params_.mass) * Mat3::Identity();
  // d(R(q boxplus dth) e_z)/ddth = -R(q) [e_z]x.
  Jx.block<3, 3>(0, 6) =
      -(T / params_.mass) * x.attitude.to_rotation_matrix() *
      skew(Vec3::UnitZ());
  const Vec3 thrust_dir = x.attitude.rotate(Vec3::UnitZ());
  Ju = (thrust_dir / params_.mass) * Eigen::RowVector4d::Ones();
}

}  // namespace relnav::nmpc
