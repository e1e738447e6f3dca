#pragma once

#include <Eigen/Dense>

namespace relnav::nmpc {

enum class QpStatus { Optimal, Infeasible, MaxIter };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // one multiplier per constraint row, >= 0
  QpStatus status{QpStatus::Optimal};
  int iterations{0};
};

struct QpOptions {
  double tol{1e-10};
  int max_iter{1000};
};

/// Dual active-set method (Goldfarb-Idnani) for the strictly convex QP
///   min 1/2 x'Gx + g0'x   s.t.   C'x >= b,
/// where column i of C is the normal of constraint i. Starts from the
/// unconstrained minimizer and adds violated constraints one at a time;
/// terminates at the exact optimum (up to tol) or reports infeasibility.
QpSolution solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g0,
                    const Eigen::MatrixXd& C, const Eigen::VectorXd& b,
                    const QpOptions& opts = {});

}  // namespace relnav::nmpc
