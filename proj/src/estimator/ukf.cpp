#include "relnav/estimator/ukf.hpp"

#include <array>
#include <functional>
#include <stdexcept>

namespace relnav::estimator {

// chi^2 99.9% gate thresholds: 10.827566170662733 (dim 1),
// 16.26623619623813 (dim 3).

EstimatorState boxplus(const EstimatorState& x, const ErrVec& d) {
  EstimatorState out;
  out.p = x.p + d.segment<3>(0);
  out.v = x.v + d.segment<3>(3);
  out.q = quat_boxplus(x.q, d.segment<3>(6));
  out.bp = x.bp + d(9);
  out.ba = x.ba + d.segment<3>(10);
  out.bg = x.bg + d.segment<3>(13);
  return out;
}

ErrVec boxminus(const EstimatorState& a, const EstimatorState& b) {
  ErrVec d;
  d.segment<3>(0) = a.p - b.p;
  d.segment<3>(3) = a.v - b.v;
  d.segment<3>(6) = quat_boxminus(a.q, b.q);
  d(9) = a.bp - b.bp;
  d.segment<3>(10) = a.ba - b.ba;
  d.segment<3>(13) = a.bg - b.bg;
  return d;
}

Ukf::Ukf(const EstimatorState& x0, const UkfConfig& cfg) : x_(x0), cfg_(cfg) {
  P_ = cfg.init_cov_diag.asDiagonal();
}

void Ukf::set_covariance(const Cov& P) {
  P_ = 0.5 * (P + P.transpose());
  enforce_spd();
}

void Ukf::enforce_spd() {
  P_ = 0.5 * (P_ + P_.transpose());
  double jitter = 1e-9;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::LLT<Cov> llt(P_);
    if (llt.info() == Eigen::Success) return;
    P_ += jitter * Cov::Identity();
    jitter *= 100.0;
  }
  throw std::runtime_error("ukf: covariance lost positive definiteness");
}

void Ukf::predict_loiter(const Vec3& accel, const Vec3& gyro, double dt) {
  predict(accel, gyro, dt, /*use_accel=*/true);
}

void Ukf::predict_track(const Vec3& gyro, double dt) {
  predict(Vec3::Zero(), gyro, dt, /*use_accel=*/false);
}

void Ukf::predict(const Vec3& accel, const Vec3& gyro, double dt,
                  bool use_accel) {
  if (!(dt > 0.0 && dt <= 0.02)) {
    throw std::invalid_argument("ukf predict: dt must be in (0, 0.02]");
  }
  const int n = kErrDim;
  const double lambda = cfg_.alpha * cfg_.alpha * (n + cfg_.kappa) - n;
  const double scale = n + lambda;
  const double wm0 = lambda / scale;
  const double wc0 = wm0 + 1.0 - cfg_.alpha * cfg_.alpha + cfg_.beta;
  const double wi = 0.5 / scale;

  Eigen::LLT<Cov> llt(scale * P_);
  if (llt.info() != Eigen::Success) {
    enforce_spd();
    llt.compute(scale * P_);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("ukf predict: sigma-point factorization failed");
    }
  }
  const Cov S = llt.matrixL();

  const auto propagate = [&](const EstimatorState& s) {
    EstimatorState out = s;
    const Vec3 w_hat = gyro - s.bg;
    out.q = quat_boxplus(s.q, w_hat * dt);
    if (use_accel) {
      const Vec3 a_hat = accel - s.ba;
      const Vec3 a_world =
          0.5 * (s.q.rotate(a_hat) + out.q.rotate(a_hat)) -
          kGravity * Vec3::UnitZ();
      out.v = s.v + a_world * dt;
    }
    out.p = s.p + 0.5 * (s.v + out.v) * dt;
    return out;
  };

  // Propagate the 2n+1 sigma points.
  std::array<EstimatorState, 2 * kErrDim + 1> Y;
  Y[0] = propagate(x_);
  for (int i = 0; i < n; ++i) {
    Y[1 + i] = propagate(boxplus(x_, S.col(i)));
    Y[1 + n + i] = propagate(boxplus(x_, -S.col(i)));
  }

  // Mean anchored at the propagated central point.
  ErrVec acc = ErrVec::Zero();
  for (int i = 1; i <= 2 * n; ++i) acc += wi * boxminus(Y[i], Y[0]);
  const EstimatorState mean = boxplus(Y[0], acc);

  Cov P = Cov::Zero();
  {
    const ErrVec d0 = boxminus(Y[0], mean);
    P += wc0 * d0 * d0.transpose();
  }
  for (int i = 1; i <= 2 * n; ++i) {
    const ErrVec d = boxminus(Y[i], mean);
    P += wi * d * d.transpose();
  }

  ErrVec qd;
  const double psd_v = use_accel ? cfg_.psd_vel : cfg_.psd_vel_track;
  qd.segment<3>(0).setConstant(cfg_.psd_pos * dt);
  qd.segment<3>(3).setConstant(psd_v * dt);
  qd.segment<3>(6).setConstant(cfg_.psd_att * dt);
  qd(9) = cfg_.psd_bp * dt;
  qd.segment<3>(10).setConstant(cfg_.psd_ba * dt);
  qd.segment<3>(13).setConstant(cfg_.psd_bg * dt);
  P += qd.asDiagonal();

  x_ = mean;
  P_ = P;
  enforce_spd();
}

UpdateResult Ukf::update(const Eigen::VectorXd& z, const Eigen::MatrixXd& noise,
                         double gate_threshold,
                         const std::function<Eigen::VectorXd(const EstimatorState&)>& h) {
  const int n = kErrDim;
  const int m = static_cast<int>(z.size());
  const double lambda = cfg_.alpha * cfg_.alpha * (n + cfg_.kappa) - n;
  const double scale = n + lambda;
  const double wm0 = lambda / scale;
  const double wc0 = wm0 + 1.0 - cfg_.alpha * cfg_.alpha + cfg_.beta;
  const double wi = 0.5 / scale;

  Eigen::LLT<Cov> llt(scale * P_);
  if (llt.info() != Eigen::Success) {
    enforce_spd();
    llt.compute(scale * P_);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("ukf update: sigma-point factorization failed");
    }
  }
  const Cov S = llt.matrixL();

  std::array<EstimatorState, 2 * kErrDim + 1> X;
  X[0] = x_;
  for (int i = 0; i < n; ++i) {
    X[1 + i] = boxplus(x_, S.col(i));
    X[1 + n + i] = boxplus(x_, -S.col(i));
  }

  Eigen::MatrixXd Z(m, 2 * n + 1);
  for (int i = 0; i <= 2 * n; ++i) Z.col(i) = h(X[i]);

  Eigen::VectorXd z_hat = wm0 * Z.col(0);
  for (int i = 1; i <= 2 * n; ++i) z_hat += wi * Z.col(i);

  Eigen::MatrixXd Szz = noise;
  Eigen::Matrix<double, kErrDim, Eigen::Dynamic> Sxz(kErrDim, m);
  Sxz.setZero();
  {
    const Eigen::VectorXd dz0 = Z.col(0) - z_hat;
    Szz += wc0 * dz0 * dz0.transpose();
    // central state deviation is zero: no Sxz contribution
  }
  for (int i = 1; i <= 2 * n; ++i) {
    const Eigen::VectorXd dz = Z.col(i) - z_hat;
    const ErrVec dx = boxminus(X[i], x_);
    Szz += wi * dz * dz.transpose();
    Sxz += wi * dx * dz.transpose();
  }

  const Eigen::VectorXd innov = z - z_hat;
  const Eigen::LLT<Eigen::MatrixXd> szz_llt(Szz);
  const double maha = innov.dot(szz_llt.solve(innov));

  UpdateResult res;
  res.mahalanobis = maha;
  if (cfg_.gate_enabled && maha > gate_threshold) {
    res.applied = false;
    return res;
  }

  const Eigen::MatrixXd K = szz_llt.solve(Sxz.transpose()).transpose();
  x_ = boxplus(x_, K * innov);
  P_ -= K * Szz * K.transpose();
  enforce_spd();
  res.applied = true;
  return res;
}

UpdateResult Ukf::update_baro(double z) {
  Eigen::VectorXd zv(1);
  zv << z;
  Eigen::MatrixXd R(1, 1);
  R << cfg_.r_baro;
  return update(zv, R, 10.827566170662733, [](const EstimatorState& s) {
    Eigen::VectorXd out(1);
    out << s.p.z() + s.bp;
    return out;
  });
}

UpdateResult Ukf::update_velocity(const Vec3& z) {
  Eigen::MatrixXd R = cfg_.r_vel * Eigen::Matrix3d::Identity();
  return update(z, R, 16.26623619623813, [](const EstimatorState& s) {
    return Eigen::VectorXd(s.v);
  });
}

void Ukf::update_loiter(double baro, const std::optional<Vec3>& velocity) {
  update_baro(baro);
  if (velocity) update_velocity(*velocity);
}

UpdateResult Ukf::update_target(const Vec3& z, double noise_scale) {
  Eigen::MatrixXd R = cfg_.r_det * noise_scale * Eigen::Matrix3d::Identity();
  return update(z, R, 16.26623619623813, [](const EstimatorState& s) {
    return Eigen::VectorXd(s.p);
  });
}

void Ukf::reanchor(const Vec3& offset) { x_.p -= offset; }

double Ukf::confidence_trace() const {
  return P_.topLeftCorner<6, 6>().trace();
}

}  // namespace relnav::estimator
