#include "relnav/nmpc/solver.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

namespace relnav::nmpc {

namespace {

struct SoftRow {
  Eigen::VectorXd normal;  // over the input vector (4N)
  double rhs;              // row . dU + s >= rhs
};

Eigen::Matrix<double, 12, 1> stage_weights(const NmpcConfig& cfg) {
  Eigen::Matrix<double, 12, 1> q;
  q << cfg.q_position, cfg.q_velocity, cfg.q_attitude, cfg.q_omega;
  return q;
}

State reference_state(const reference::Stage& st) {
  State s;
  s.position = st.position;
  s.velocity = st.velocity;
  s.attitude = st.attitude;
  s.angular_velocity = Vec3::Zero();
  return s;
}

double stage_value(const State& s, int err_index) {
  if (err_index < 3) return s.position(err_index);
  if (err_index < 6) return s.velocity(err_index - 3);
  return s.angular_velocity(err_index - 9);
}

}  // namespace

NmpcSolver::NmpcSolver(std::shared_ptr<const DynamicsModel> model,
                       const NmpcConfig& cfg)
    : model_(std::move(model)), cfg_(cfg) {
  if (cfg_.horizon < 1 || cfg_.dt <= 0.0 || cfg_.u_min > cfg_.u_max) {
    throw std::invalid_argument("nmpc: invalid configuration");
  }
}

double NmpcSolver::merit(const std::vector<State>& X,
                         const std::vector<Vec4>& U, const State& x0,
                         const reference::ReferenceTrajectory& ref,
                         const std::vector<safety::ObstaclePoint>& obstacles,
                         const safety::CbfConfig& cbf) const {
  const int N = cfg_.horizon;
  const Eigen::Matrix<double, 12, 1> Q = stage_weights(cfg_);
  constexpr double kDefectPenalty = 1e3;

  double phi = 0.0;
  for (int j = 0; j <= N; ++j) {
    const ErrVec e = state_boxminus(X[j], reference_state(ref.stages[j]));
    phi += 0.5 * e.dot(Q.asDiagonal() * e);
  }
  for (int j = 0; j < N; ++j) {
    const Vec4 du = U[j] - cfg_.u_ref;
    phi += 0.5 * du.dot(cfg_.r_input.asDiagonal() * du);
  }
  phi += kDefectPenalty * state_boxminus(x0, X[0]).lpNorm<1>();
  for (int j = 0; j < N; ++j) {
    const ErrVec d = state_boxminus(model_->step(X[j], U[j], cfg_.dt), X[j + 1]);
    phi += kDefectPenalty * d.lpNorm<1>();
  }
  // Soft-constraint violations: CBF rows and state bounds.
  for (int j = 0; j < N && !obstacles.empty(); ++j) {
    const Vec3 a = model_->acceleration(X[j], U[j]);
    for (const auto& ob : obstacles) {
      const auto terms =
          safety::cbf_terms(X[j].position, X[j].velocity, a, ob.position, cbf);
      phi += cfg_.slack_weight *
             std::max(0.0, -safety::cbf_residual(terms, cbf));
    }
  }
  Eigen::Matrix<double, 12, 1> lo, hi;
  lo << cfg_.p_min, cfg_.v_min, Vec3::Constant(-1e18), cfg_.w_min;
  hi << cfg_.p_max, cfg_.v_max, Vec3::Constant(1e18), cfg_.w_max;
  for (int j = 1; j <= N; ++j) {
    for (int c = 0; c < 12; ++c) {
      if (c >= 6 && c < 9) continue;
      const double val = stage_value(X[j], c);
      if (std::abs(lo(c)) < 1e8) {
        phi += cfg_.slack_weight * std::max(0.0, lo(c) - val);
      }
      if (std::abs(hi(c)) < 1e8) {
        phi += cfg_.slack_weight * std::max(0.0, val - hi(c));
      }
    }
  }
  return phi;
}

NmpcSolution NmpcSolver::solve(const State& x0,
                               const reference::ReferenceTrajectory& ref,
                               const std::vector<safety::ObstaclePoint>& obstacles,
                               const safety::CbfConfig& cbf) {
  const auto t_start = std::chrono::steady_clock::now();
  const int N = cfg_.horizon;
  const int nu = 4 * N;
  if (static_cast<int>(ref.stages.size()) != N + 1) {
    throw std::invalid_argument("nmpc: reference must have horizon+1 stages");
  }

  // Warm start: shift the previous solution by one stage, repeating the last
  // input; otherwise roll out from the reference input.
  if (!warm_ || static_cast<int>(U_.size()) != N) {
    U_.assign(N, cfg_.u_ref);
    X_.resize(N + 1);
    X_[0] = x0;
    for (int j = 0; j < N; ++j) X_[j + 1] = model_->step(X_[j], U_[j], cfg_.dt);
  } else {
    for (int j = 0; j + 1 < N; ++j) {
      U_[j] = U_[j + 1];
      X_[j] = X_[j + 1];
    }
    X_[N - 1] = X_[N];
    X_[N] = model_->step(X_[N - 1], U_[N - 1], cfg_.dt);
  }

  const Eigen::Matrix<double, 12, 1> Q = stage_weights(cfg_);
  Eigen::Matrix<double, 12, 1> lo, hi;
  lo << cfg_.p_min, cfg_.v_min, Vec3::Constant(-1e18), cfg_.w_min;
  hi << cfg_.p_max, cfg_.v_max, Vec3::Constant(1e18), cfg_.w_max;

  NmpcSolution sol;
  sol.status = SolveStatus::MaxIter;
  sol.merit_history.push_back(merit(X_, U_, x0, ref, obstacles, cbf));

  std::vector<MatA> A(N);
  std::vector<MatB> B(N);
  std::vector<ErrVec> defect(N), M(N + 1), e(N + 1);
  std::vector<Eigen::Matrix<double, 12, Eigen::Dynamic>> G(N + 1);

  for (int iter = 0; iter < cfg_.max_iterations; ++iter) {
    // Linearize dynamics and cost around the iterate.
    for (int j = 0; j < N; ++j) {
      defect[j] = state_boxminus(model_->step(X_[j], U_[j], cfg_.dt), X_[j + 1]);
      model_->jacobians(X_[j], U_[j], cfg_.dt, A[j], B[j]);
    }
    for (int j = 0; j <= N; ++j) {
      e[j] = state_boxminus(X_[j], reference_state(ref.stages[j]));
    }

    M[0] = state_boxminus(x0, X_[0]);
    G[0] = Eigen::Matrix<double, 12, Eigen::Dynamic>::Zero(12, nu);
    for (int j = 0; j < N; ++j) {
      M[j + 1] = A[j] * M[j] + defect[j];
      G[j + 1] = A[j] * G[j];
      G[j + 1].middleCols<4>(4 * j) += B[j];
    }

    Eigen::MatrixXd H =
        cfg_.levenberg * Eigen::MatrixXd::Identity(nu, nu);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nu);
    for (int j = 0; j <= N; ++j) {
      const Eigen::Matrix<double, 12, Eigen::Dynamic> QG =
          Q.asDiagonal() * G[j];
      H.noalias() += G[j].transpose() * QG;
      g.noalias() += G[j].transpose() * (Q.asDiagonal() * (e[j] + M[j]));
    }
    for (int j = 0; j < N; ++j) {
      H.block<4, 4>(4 * j, 4 * j) += cfg_.r_input.asDiagonal();
      g.segment<4>(4 * j) += cfg_.r_input.asDiagonal() * (U_[j] - cfg_.u_ref);
    }

    // Hard rows: input box bounds.
    std::vector<Eigen::VectorXd> hard_normals;
    std::vector<double> hard_rhs;
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(nu);
        row(4 * j + i) = 1.0;
        hard_normals.push_back(row);
        hard_rhs.push_back(cfg_.u_min - U_[j](i));
        hard_normals.push_back(-row);
        hard_rhs.push_back(U_[j](i) - cfg_.u_max);
      }
    }

    // Soft rows: state bounds (stages 1..N) and CBF rows (stages 0..N-1).
    std::vector<SoftRow> soft;
    for (int j = 1; j <= N; ++j) {
      for (int c = 0; c < 12; ++c) {
        if (c >= 6 && c < 9) continue;
        const double val = stage_value(X_[j], c);
        if (std::abs(lo(c)) < 1e8) {
          SoftRow r;
          r.normal = G[j].row(c).transpose();
          r.rhs = lo(c) - val - M[j](c);
          soft.push_back(std::move(r));
        }
        if (std::abs(hi(c)) < 1e8) {
          SoftRow r;
          r.normal = -G[j].row(c).transpose();
          r.rhs = val + M[j](c) - hi(c);
          soft.push_back(std::move(r));
        }
      }
    }
    for (int j = 0; j < N && !obstacles.empty(); ++j) {
      const Vec3 a = model_->acceleration(X_[j], U_[j]);
      Eigen::Matrix<double, 3, 12> Ja;
      Eigen::Matrix<double, 3, 4> Ju;
      model_->accel_jacobian(X_[j], U_[j], Ja, Ju);
      for (const auto& ob : obstacles) {
        const Vec3 rel = X_[j].position - ob.position;
        const auto terms = safety::cbf_terms(X_[j].position, X_[j].velocity, a,
                                             ob.position, cbf);
        const double res = safety::cbf_residual(terms, cbf);
        ErrVec grad_x = 2.0 * Ja.transpose() * rel;
        grad_x.segment<3>(0) += 2.0 * a + 4.0 * cbf.lambda * X_[j].velocity +
                                2.0 * cbf.lambda * cbf.lambda * rel;
        grad_x.segment<3>(3) += 4.0 * X_[j].velocity + 4.0 * cbf.lambda * rel;
        const Vec4 grad_u = 2.0 * Ju.transpose() * rel;
        SoftRow r;
        r.normal = G[j].transpose() * grad_x;
        r.normal.segment<4>(4 * j) += grad_u;
        r.rhs = -res - grad_x.dot(M[j]);
        soft.push_back(std::move(r));
      }
    }

    const int n_hard = static_cast<int>(hard_normals.size());
    const int n_soft = static_cast<int>(soft.size());

    // Fast pass: treat soft rows as hard. Exact whenever the result is
    // feasible and no soft dual reaches the L1 penalty weight.
    QpSolution qp;
    bool need_slack_pass = false;
    {
      Eigen::MatrixXd C(nu, n_hard + n_soft);
      Eigen::VectorXd b(n_hard + n_soft);
      for (int i = 0; i < n_hard; ++i) {
        C.col(i) = hard_normals[i];
        b(i) = hard_rhs[i];
      }
      for (int i = 0; i < n_soft; ++i) {
        C.col(n_hard + i) = soft[i].normal;
        b(n_hard + i) = soft[i].rhs;
      }
      QpOptions qopts;
      qopts.tol = cfg_.qp_tolerance;
      qp = solve_qp(H, g, C, b, qopts);
      sol.qp_iterations += qp.iterations;
      if (qp.status != QpStatus::Optimal) {
        need_slack_pass = true;
      } else {
        for (int i = 0; i < n_soft; ++i) {
          if (qp.lambda(n_hard + i) >= 0.99 * cfg_.slack_weight) {
            need_slack_pass = true;
            break;
          }
        }
      }
      if (!need_slack_pass) {
        last_qp_.H = H;
        last_qp_.g = g;
        last_qp_.C = std::move(C);
        last_qp_.b = std::move(b);
        last_qp_.z_opt = qp.x;
        last_qp_.lambda = qp.lambda;
        last_qp_.n_inputs = nu;
        last_qp_.n_slack = 0;
        sol.slacks = Eigen::VectorXd::Zero(n_soft);
      }
    }

    if (need_slack_pass) {
      const int nz = nu + n_soft;
      Eigen::MatrixXd Hs = Eigen::MatrixXd::Zero(nz, nz);
      Hs.topLeftCorner(nu, nu) = H;
      Hs.bottomRightCorner(n_soft, n_soft) =
          cfg_.slack_reg * Eigen::MatrixXd::Identity(n_soft, n_soft);
      Eigen::VectorXd gs = Eigen::VectorXd::Zero(nz);
      gs.head(nu) = g;
      gs.tail(n_soft).setConstant(cfg_.slack_weight);

      const int m = n_hard + 2 * n_soft;
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nz, m);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
      for (int i = 0; i < n_hard; ++i) {
        C.col(i).head(nu) = hard_normals[i];
        b(i) = hard_rhs[i];
      }
      for (int i = 0; i < n_soft; ++i) {
        C.col(n_hard + i).head(nu) = soft[i].normal;
        C(nu + i, n_hard + i) = 1.0;  // slack enters its row
        b(n_hard + i) = soft[i].rhs;
        C(nu + i, n_hard + n_soft + i) = 1.0;  // s >= 0
        b(n_hard + n_soft + i) = 0.0;
      }
      QpOptions qopts;
      qopts.tol = cfg_.qp_tolerance;
      qp = solve_qp(Hs, gs, C, b, qopts);
      sol.qp_iterations += qp.iterations;
      if (qp.status == QpStatus::Infeasible) {
        sol.status = SolveStatus::Degenerate;
        break;
      }
      last_qp_.H = Hs;
      last_qp_.g = gs;
      last_qp_.C = C;
      last_qp_.b = b;
      last_qp_.z_opt = qp.x;
      last_qp_.lambda = qp.lambda;
      last_qp_.n_inputs = nu;
      last_qp_.n_slack = n_soft;
      sol.slacks = qp.x.tail(n_soft);
    }

    const Eigen::VectorXd dU = qp.x.head(nu);

    // Predicted merit decrease from the Gauss-Newton model.
    double model_cost = 0.0;
    for (int j = 0; j <= N; ++j) {
      const ErrVec dx = M[j] + G[j] * dU;
      const ErrVec err = e[j] + dx;
      model_cost += 0.5 * err.dot(Q.asDiagonal() * err);
    }
    for (int j = 0; j < N; ++j) {
      const Vec4 du = U_[j] - cfg_.u_ref + dU.segment<4>(4 * j);
      model_cost += 0.5 * du.dot(cfg_.r_input.asDiagonal() * du);
    }
    if (last_qp_.n_slack > 0) {
      model_cost += cfg_.slack_weight * sol.slacks.sum();
    }
    const double phi0 = sol.merit_history.back();
    const double pred = phi0 - model_cost;

    // Backtracking line search on the L1 merit.
    double alpha = 1.0;
    double best_alpha = -1.0, best_phi = phi0;
    std::vector<State> Xc(N + 1);
    std::vector<Vec4> Uc(N);
    bool accepted = false;
    for (int ls = 0; ls < 11; ++ls) {
      for (int j = 0; j <= N; ++j) {
        const ErrVec dx = M[j] + G[j] * dU;
        Xc[j] = state_boxplus(X_[j], alpha * dx);
      }
      for (int j = 0; j < N; ++j) {
        Uc[j] = U_[j] + alpha * dU.segment<4>(4 * j);
      }
      const double phi = merit(Xc, Uc, x0, ref, obstacles, cbf);
      if (phi <= phi0 - 1e-4 * alpha * std::max(pred, 0.0) && phi <= phi0) {
        accepted = true;
        best_alpha = alpha;
        best_phi = phi;
        break;
      }
      if (phi < best_phi) {
        best_phi = phi;
        best_alpha = alpha;
      }
      alpha *= 0.5;
    }
    if (!accepted && best_alpha < 0.0) {
      // No descent direction left: the iterate is (numerically) stationary.
      sol.status = SolveStatus::Converged;
      break;
    }
    const double a = best_alpha;
    for (int j = 0; j <= N; ++j) {
      const ErrVec dx = M[j] + G[j] * dU;
      X_[j] = state_boxplus(X_[j], a * dx);
    }
    for (int j = 0; j < N; ++j) U_[j] += a * dU.segment<4>(4 * j);
    sol.merit_history.push_back(best_phi);
    sol.iterations = iter + 1;

    double max_defect = state_boxminus(x0, X_[0]).lpNorm<Eigen::Infinity>();
    for (int j = 0; j < N; ++j) {
      max_defect = std::max(
          max_defect, state_boxminus(model_->step(X_[j], U_[j], cfg_.dt),
                                     X_[j + 1])
                          .lpNorm<Eigen::Infinity>());
    }
    if (a * dU.lpNorm<Eigen::Infinity>() < cfg_.step_tolerance &&
        max_defect < cfg_.defect_tolerance) {
      sol.status = SolveStatus::Converged;
      break;
    }
  }

  // Reference inputs for kkt_residual_at: residuals of perturbed input
  // sequences are evaluated as offsets from the returned solution.
  last_qp_.u_lin = U_;

  sol.inputs = U_;
  sol.states = X_;
  if (sol.slacks.size() > 0) sol.max_slack = sol.slacks.maxCoeff();

  // KKT residual of the final QP at its optimum.
  if (last_qp_.z_opt.size() > 0 && sol.status != SolveStatus::Degenerate) {
    const Eigen::VectorXd& z = last_qp_.z_opt;
    const Eigen::VectorXd stat =
        last_qp_.H * z + last_qp_.g - last_qp_.C * last_qp_.lambda;
    sol.kkt_residual = stat.lpNorm<Eigen::Infinity>();
    if (last_qp_.b.size() > 0) {
      const Eigen::VectorXd viol = last_qp_.b - last_qp_.C.transpose() * z;
      sol.kkt_residual += std::max(0.0, viol.maxCoeff());
    }
  } else if (sol.status == SolveStatus::Degenerate) {
    sol.kkt_residual = std::numeric_limits<double>::infinity();
  }

  warm_ = true;
  sol.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  return sol;
}

double NmpcSolver::kkt_residual_at(const std::vector<Vec4>& inputs) const {
  const int nu = last_qp_.n_inputs;
  if (nu == 0) return 0.0;
  Eigen::VectorXd z = last_qp_.z_opt;
  // Offset the input block by the difference from the solved inputs.
  for (int j = 0; j < static_cast<int>(inputs.size()) && 4 * j < nu; ++j) {
    z.segment<4>(4 * j) += inputs[j] - last_qp_.u_lin[j];
  }
  const Eigen::VectorXd stat =
      last_qp_.H * z + last_qp_.g - last_qp_.C * last_qp_.lambda;
  const Eigen::VectorXd viol = last_qp_.b - last_qp_.C.transpose() * z;
  return stat.lpNorm<Eigen::Infinity>() + std::max(0.0, viol.maxCoeff());
}

}  // namespace relnav::nmpc
