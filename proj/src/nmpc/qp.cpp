#include "relnav/nmpc/qp.hpp"

#include <limits>
#include <vector>

namespace relnav::nmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Givens {
  double c{1.0};
  double s{0.0};
};

Givens make_givens(double a, double b) {
  Givens g;
  if (b == 0.0) {
    g.c = 1.0;
    g.s = 0.0;
    return g;
  }
  const double h = std::hypot(a, b);
  g.c = a / h;
  g.s = b / h;
  return g;
}

}  // namespace

QpSolution solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g0,
                    const Eigen::MatrixXd& C, const Eigen::VectorXd& b,
                    const QpOptions& opts) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(C.cols());

  QpSolution sol;
  sol.lambda = Eigen::VectorXd::Zero(m);

  // J = L^-T from G = L L^T; x = unconstrained minimizer.
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  llt.matrixL().transpose().solveInPlace(J);
  Eigen::VectorXd x = llt.solve(-g0);

  if (m == 0) {
    sol.x = x;
    sol.status = QpStatus::Optimal;
    return sol;
  }

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> active;   // constraint indices, |active| = q
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);  // duals of active + candidate
  int q = 0;

  // Rotates d[j] into d[j-1] for j = n-1 .. q+1 and applies the same plane
  // rotations to the columns of J.
  const auto add_constraint = [&](Eigen::VectorXd& d) {
    for (int j = n - 1; j >= q + 1; --j) {
      const Givens g = make_givens(d(j - 1), d(j));
      const double dj1 = g.c * d(j - 1) + g.s * d(j);
      d(j - 1) = dj1;
      d(j) = 0.0;
      const Eigen::VectorXd col1 = J.col(j - 1);
      const Eigen::VectorXd col2 = J.col(j);
      J.col(j - 1) = g.c * col1 + g.s * col2;
      J.col(j) = -g.s * col1 + g.c * col2;
    }
    R.col(q).head(q + 1) = d.head(q + 1);
    ++q;
  };

  // Removes active constraint at position l and restores R's triangularity.
  const auto delete_constraint = [&](int l) {
    active.erase(active.begin() + l);
    for (int j = l; j < q - 1; ++j) {
      R.col(j).head(q) = R.col(j + 1).head(q);
      u(j) = u(j + 1);
    }
    R.col(q - 1).setZero();
    u(q - 1) = u(q);
    --q;
    for (int j = l; j < q; ++j) {
      const Givens g = make_givens(R(j, j), R(j + 1, j));
      if (g.s == 0.0) continue;
      for (int k = j; k < q; ++k) {
        const double t1 = R(j, k), t2 = R(j + 1, k);
        R(j, k) = g.c * t1 + g.s * t2;
        R(j + 1, k) = -g.s * t1 + g.c * t2;
      }
      const Eigen::VectorXd col1 = J.col(j);
      const Eigen::VectorXd col2 = J.col(j + 1);
      J.col(j) = g.c * col1 + g.s * col2;
      J.col(j + 1) = -g.s * col1 + g.c * col2;
    }
  };

  int iter = 0;
  while (true) {
    if (++iter > opts.max_iter) {
      sol.x = x;
      sol.status = QpStatus::MaxIter;
      for (int k = 0; k < q; ++k) sol.lambda(active[k]) = u(k);
      return sol;
    }

    // Most violated inactive constraint.
    int p = -1;
    double worst = -opts.tol;
    Eigen::VectorXd s = C.transpose() * x - b;
    for (int i = 0; i < m; ++i) {
      bool is_active = false;
      for (int k = 0; k < q; ++k) {
        if (active[k] == i) {
          is_active = true;
          break;
        }
      }
      if (is_active) continue;
      if (s(i) < worst) {
        worst = s(i);
        p = i;
      }
    }
    if (p < 0) {
      sol.x = x;
      sol.status = QpStatus::Optimal;
      for (int k = 0; k < q; ++k) sol.lambda(active[k]) = u(k);
      return sol;
    }

    const Eigen::VectorXd np = C.col(p);
    u(q) = 0.0;
    double sp = s(p);

    while (true) {
      if (++iter > opts.max_iter) {
        sol.x = x;
        sol.status = QpStatus::MaxIter;
        for (int k = 0; k < q; ++k) sol.lambda(active[k]) = u(k);
        return sol;
      }

      Eigen::VectorXd d = J.transpose() * np;
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      if (q < n) z = J.rightCols(n - q) * d.tail(n - q);
      Eigen::VectorXd r = Eigen::VectorXd::Zero(q);
      if (q > 0) {
        r = R.topLeftCorner(q, q)
                .triangularView<Eigen::Upper>()
                .solve(d.head(q));
      }

      // Maximum dual step before an active multiplier hits zero.
      double t1 = kInf;
      int blocking = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > opts.tol && u(k) / r(k) < t1) {
          t1 = u(k) / r(k);
          blocking = k;
        }
      }
      const double z_np = z.dot(np);
      const double t2 = (z.norm() > opts.tol && z_np > opts.tol)
                            ? -sp / z_np
                            : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) {
        sol.x = x;
        sol.status = QpStatus::Infeasible;
        for (int k = 0; k < q; ++k) sol.lambda(active[k]) = u(k);
        return sol;
      }

      if (t2 >= kInf) {
        // Dual step only: drop the blocking constraint and retry.
        u.head(q) -= t * r;
        u(q) += t;
        delete_constraint(blocking);
        continue;
      }

      x += t * z;
      u.head(q) -= t * r;
      u(q) += t;
      sp = np.dot(x) - b(p);

      if (t == t2) {
        // Candidate becomes active; its multiplier already sits at slot q-1
        // after the increment inside add_constraint.
        active.push_back(p);
        add_constraint(d);
        break;
      }
      // Partial step: drop the blocking constraint, keep working on p.
      delete_constraint(blocking);
    }
  }
}

}  // namespace relnav::nmpc
