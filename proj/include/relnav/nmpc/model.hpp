#pragma once

#include <vector>

#include "relnav/plant/dynamics.hpp"

namespace relnav::nmpc {

/// NMPC state: p, v, q, omega (13 components; biases excluded).
using State = plant::TrueState;

inline constexpr int kErrDim = 12;  // p(3) v(3) dtheta(3) omega(3)
inline constexpr int kInputDim = 4;

using ErrVec = Eigen::Matrix<double, kErrDim, 1>;
using MatA = Eigen::Matrix<double, kErrDim, kErrDim>;
using MatB = Eigen::Matrix<double, kErrDim, kInputDim>;

State state_boxplus(const State& x, const ErrVec& d);
ErrVec state_boxminus(const State& a, const State& b);

class DynamicsModel;

/// Open-loop prediction: integrates the model over the input sequence.
std::vector<State> rollout(const DynamicsModel& model, const State& x0,
                           const std::vector<Vec4>& inputs, double dt);

/// Prediction model interface. The default implementation is the plant's
/// nominal rigid-body model; tests substitute reduced models.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual State step(const State& x, const Vec4& u, double dt) const = 0;
  /// Discrete Jacobians of step() with respect to the 12-dim error state and
  /// the input.
  virtual void jacobians(const State& x, const Vec4& u, double dt, MatA& A,
                         MatB& B) const = 0;
  /// World-frame translational acceleration (used by the CBF rows).
  virtual Vec3 acceleration(const State& x, const Vec4& u) const = 0;
  virtual void accel_jacobian(const State& x, const Vec4& u,
                              Eigen::Matrix<double, 3, kErrDim>& Jx,
                              Eigen::Matrix<double, 3, kInputDim>& Ju) const = 0;
};

/// Rigid-body quadrotor model, RK4-discretized with the same integrator as
/// the plant; Jacobians are analytic (chained through the RK4 stages and
/// projected onto the attitude tangent space).
class QuadModel : public DynamicsModel {
 public:
  explicit QuadModel(const plant::QuadrotorParams& params) : params_(params) {}

  const plant::QuadrotorParams& params() const { return params_; }

  State step(const State& x, const Vec4& u, double dt) const override;
  void jacobians(const State& x, const Vec4& u, double dt, MatA& A,
                 MatB& B) const override;
  Vec3 acceleration(const State& x, const Vec4& u) const override;
  void accel_jacobian(const State& x, const Vec4& u,
                      Eigen::Matrix<double, 3, kErrDim>& Jx,
                      Eigen::Matrix<double, 3, kInputDim>& Ju) const override;

 private:
  plant::QuadrotorParams params_;
};

}  // namespace relnav::nmpc
