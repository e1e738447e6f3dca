#pragma once

#include <memory>
#include <vector>

#include "relnav/nmpc/model.hpp"
#include "relnav/nmpc/qp.hpp"
#include "relnav/reference/reference.hpp"
#include "relnav/safety/cbf.hpp"

namespace relnav::nmpc {

struct NmpcConfig {
  int horizon{10};
  double dt{0.2};  // s, shooting step (2 s horizon with N = 10)

  // Stage weights on the 12-dim state error (attitude via 3-dim error).
  Vec3 q_position{Vec3::Constant(8.0)};
  Vec3 q_velocity{Vec3::Constant(4.0)};
  Vec3 q_attitude{Vec3(6.0, 6.0, 10.0)};
  Vec3 q_omega{Vec3::Constant(0.8)};
  Vec4 r_input{Vec4::Constant(0.4)};

  // Box bounds. Attitude is unbounded; quaternions cannot be boxed.
  Vec3 p_min{Vec3::Constant(-1e9)}, p_max{Vec3::Constant(1e9)};
  Vec3 v_min{Vec3::Constant(-1e9)}, v_max{Vec3::Constant(1e9)};
  Vec3 w_min{Vec3::Constant(-1e9)}, w_max{Vec3::Constant(1e9)};
  double u_min{0.0};
  double u_max{11.772};
  Vec4 u_ref{Vec4::Constant(2.943)};  // hover thrust per motor

  int max_iterations{2};  // real-time iteration count
  double qp_tolerance{1e-10};
  double step_tolerance{1e-6};
  double defect_tolerance{1e-8};
  double slack_weight{1e4};
  double slack_reg{1e-2};
  double levenberg{1e-9};
};

enum class SolveStatus { Converged, MaxIter, Degenerate };

struct NmpcSolution {
  std::vector<Vec4> inputs;    // N motor-thrust vectors
  std::vector<State> states;   // N+1 predicted states
  Eigen::VectorXd slacks;      // one per softened (CBF/state-bound) row
  double max_slack{0.0};
  double kkt_residual{0.0};
  int iterations{0};
  int qp_iterations{0};
  double wall_time{0.0};       // s; excluded from deterministic logs
  SolveStatus status{SolveStatus::Converged};
  std::vector<double> merit_history;  // merit after each accepted iterate
};

/// Multiple-shooting Gauss-Newton SQP with condensing. Dynamics enter as
/// linearized equality constraints (defects are eliminated exactly); input
/// bounds are hard rows; state bounds and per-stage CBF rows are softened
/// with L1-penalized slack so the QP is feasible by construction.
class NmpcSolver {
 public:
  NmpcSolver(std::shared_ptr<const DynamicsModel> model, const NmpcConfig& cfg);

  NmpcSolution solve(const State& x0, const reference::ReferenceTrajectory& ref,
                     const std::vector<safety::ObstaclePoint>& obstacles,
                     const safety::CbfConfig& cbf);

  void reset_warm_start() { warm_ = false; }
  const NmpcConfig& config() const { return cfg_; }

  /// Stationarity + primal-feasibility residual (max norm) of the last QP,
  /// evaluated at an arbitrary input sequence (slacks kept from the solve).
  double kkt_residual_at(const std::vector<Vec4>& inputs) const;

 private:
  struct QpData {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd C;  // columns are constraint normals
    Eigen::VectorXd b;
    Eigen::VectorXd z_opt;
    Eigen::VectorXd lambda;
    std::vector<Vec4> u_lin;  // inputs at the linearization point
    int n_inputs{0};
    int n_slack{0};
  };

  double merit(const std::vector<State>& X, const std::vector<Vec4>& U,
               const State& x0, const reference::ReferenceTrajectory& ref,
               const std::vector<safety::ObstaclePoint>& obstacles,
               const safety::CbfConfig& cbf) const;

  std::shared_ptr<const DynamicsModel> model_;
  NmpcConfig cfg_;
  bool warm_{false};
  std::vector<State> X_;
  std::vector<Vec4> U_;
  QpData last_qp_;
};

}  // namespace relnav::nmpc
