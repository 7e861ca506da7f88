#include "rio/factors.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "rio/manifold.hpp"

namespace rio {

namespace {

double quat_sign(const Quat& q) { return q.w() < 0.0 ? -1.0 : 1.0; }

}  // namespace

// ---------------------------------------------------------------------------
// OSL
// ---------------------------------------------------------------------------

Vec6 osl_residual(const NavState& xk, const NavState& xk1, const OslDisplacement& obs) {
  const Quat dq_est = xk.q.conjugate() * xk1.q;
  const Vec3 dp_est = quat_to_rot(xk.q).transpose() * (xk1.p - xk.p);

  Vec6 r;
  r.head<3>() = two_vec(obs.dq.conjugate() * dq_est);
  r.tail<3>() = dp_est - obs.dp;
  return r;
}

OslJacobians osl_jacobians(const NavState& xk, const NavState& xk1,
                           const OslDisplacement& obs) {
  const Quat err = obs.dq.conjugate() * (xk.q.conjugate() * xk1.q);
  const double sign = quat_sign(err);

  OslJacobians j;
  j.rot_wrt_qk =
      -sign * brc3(right_matrix(obs.dq) * left_matrix(xk1.q.conjugate() * xk.q));
  j.rot_wrt_qk1 = sign * brc3(left_matrix(err));

  const Mat3 rk_t = quat_to_rot(xk.q).transpose();
  j.trans_wrt_qk = hat(rk_t * (xk1.p - xk.p));
  j.trans_wrt_pk = -rk_t;
  j.trans_wrt_pk1 = rk_t;
  return j;
}

// ---------------------------------------------------------------------------
// IMU
// ---------------------------------------------------------------------------

Vec15 imu_residual(const NavState& xk, const NavState& xk1, const Preintegration& pre,
                   const Vec3& gravity) {
  const Vec3 dbg = xk.bg - pre.bias_point.gyro;
  const Vec3 dba = xk.ba - pre.bias_point.accel;
  const double dt = pre.duration;

  const Quat gamma_corr =
      Quat(pre.gamma * vec_to_quat(pre.jac_gamma_gyro * dbg)).normalized();
  const Quat dq_est = xk.q.conjugate() * xk1.q;
  const Mat3 rk_t = quat_to_rot(xk.q).transpose();

  Vec15 r;
  r.segment<3>(0) = two_vec(gamma_corr.conjugate() * dq_est);
  r.segment<3>(3) = rk_t * (xk1.p - xk.p - xk.v * dt + 0.5 * gravity * dt * dt) -
                    pre.jac_alpha_gyro * dbg - pre.jac_alpha_accel * dba - pre.alpha;
  r.segment<3>(6) = rk_t * (xk1.v - xk.v + gravity * dt) - pre.jac_beta_gyro * dbg -
                    pre.jac_beta_accel * dba - pre.beta;
  r.segment<3>(9) = xk1.bg - xk.bg;
  r.segment<3>(12) = xk1.ba - xk.ba;
  return r;
}

ImuJacobians imu_jacobians(const NavState& xk, const NavState& xk1,
                           const Preintegration& pre, const Vec3& gravity) {
  const Vec3 dbg = xk.bg - pre.bias_point.gyro;
  const double dt = pre.duration;
  const Mat3 rk_t = quat_to_rot(xk.q).transpose();

  const Vec3 c = pre.jac_gamma_gyro * dbg;
  const Quat gamma_corr = Quat(pre.gamma * vec_to_quat(c)).normalized();
  const Quat err = gamma_corr.conjugate() * (xk.q.conjugate() * xk1.q);
  const double sign = quat_sign(err);

  ImuJacobians j;
  j.gamma_wrt_qk =
      -sign * brc3(right_matrix(gamma_corr) * left_matrix(xk1.q.conjugate() * xk.q));
  j.gamma_wrt_qk1 = sign * brc3(left_matrix(err));
  // Exact chain through gamma o E(C dbg): the E() perturbation enters through
  // the right Jacobian of C dbg.
  j.gamma_wrt_bgk =
      -sign * brc3(right_matrix(err)) * right_jacobian(c) * pre.jac_gamma_gyro;

  j.alpha_wrt_qk = hat(rk_t * (xk1.p - xk.p - xk.v * dt + 0.5 * gravity * dt * dt));
  j.alpha_wrt_pk = -rk_t;
  j.alpha_wrt_pk1 = rk_t;
  j.alpha_wrt_vk = -rk_t * dt;
  j.alpha_wrt_bgk = -pre.jac_alpha_gyro;
  j.alpha_wrt_bak = -pre.jac_alpha_accel;

  j.beta_wrt_qk = hat(rk_t * (xk1.v - xk.v + gravity * dt));
  j.beta_wrt_vk = -rk_t;
  j.beta_wrt_vk1 = rk_t;
  j.beta_wrt_bgk = -pre.jac_beta_gyro;
  j.beta_wrt_bak = -pre.jac_beta_accel;
  return j;
}

// ---------------------------------------------------------------------------
// UWB
// ---------------------------------------------------------------------------

std::tuple<double, double, double> uwb_interp_coeffs(double dt, double step) {
  if (step <= 0.0 || dt > step) {
    throw std::invalid_argument("uwb_interp_coeffs: need 0 <= dt <= step, step > 0");
  }
  const double s = dt / step;
  const double a = -(step * step - dt * dt) / (2.0 * step);
  const double b = -(step - dt) * (step - dt) / (2.0 * step);
  return {s, a, b};
}

Vec3 uwb_predicted_vector(const NavState& xk, const NavState& xk1,
                          const UwbObservation& obs) {
  const auto [s, a, b] = uwb_interp_coeffs(obs.dt, obs.step);
  const Mat3 rk = quat_to_rot(xk.q);
  const Vec3 phi = log_so3(rk.transpose() * quat_to_rot(xk1.q));
  return xk1.p + rk * exp_so3(s * phi) * obs.antenna + a * xk1.v + b * xk.v - obs.anchor;
}

double uwb_residual(const NavState& xk, const NavState& xk1, const UwbObservation& obs) {
  return uwb_predicted_vector(xk, xk1, obs).norm() - obs.range;
}

UwbJacobians uwb_jacobians(const NavState& xk, const NavState& xk1,
                           const UwbObservation& obs) {
  const auto [s, a, b] = uwb_interp_coeffs(obs.dt, obs.step);
  const Mat3 rk = quat_to_rot(xk.q);
  const Mat3 rk1 = quat_to_rot(xk1.q);
  const Vec3 phi = log_so3(rk.transpose() * rk1);

  const Vec3 n = xk1.p + rk * exp_so3(s * phi) * obs.antenna + a * xk1.v + b * xk.v -
                 obs.anchor;
  // d||n||/dn is the unit direction (the un-normalized form does not match
  // finite differences).
  const RowVec3 u = n.normalized().transpose();

  UwbJacobians j;
  j.wrt_pk1 = u;
  j.wrt_vk1 = a * u;
  j.wrt_vk = b * u;

  // Chain for qk1: n depends on it through phi only.
  j.wrt_qk1 = u * rk * (-exp_so3(s * phi) * hat(obs.antenna)) * right_jacobian(s * phi) *
              (s * right_jacobian_inv(phi));

  // Chain for qk: write the antenna term as Rk1 Exp(sbar phi) y with
  // sbar = s - 1, so qk enters through phi alone, and
  // d phi / d theta_k = -Hinv(-phi).
  const double sbar = s - 1.0;
  j.wrt_qk = u * rk1 * (-exp_so3(sbar * phi) * hat(obs.antenna)) *
             right_jacobian(sbar * phi) * (-sbar * right_jacobian_inv(-phi));
  return j;
}

// ---------------------------------------------------------------------------
// Block assembly
// ---------------------------------------------------------------------------

ResidualBlock make_osl_block(int k, const NavState& xk, const NavState& xk1,
                             const OslDisplacement& obs) {
  ResidualBlock block;
  block.family = ResidualBlock::Family::kOsl;
  block.residual = osl_residual(xk, xk1, obs);

  Vec6 inv_sqrt;
  for (int i = 0; i < 6; ++i) inv_sqrt[i] = 1.0 / (obs.sigma[i] * std::sqrt(obs.dt));
  block.sqrt_info = inv_sqrt.asDiagonal();

  const OslJacobians j = osl_jacobians(xk, xk1, obs);
  auto entry = [&](int state, Block tag, const Mat3& rot_rows, const Mat3& trans_rows) {
    MatX m = MatX::Zero(6, 3);
    m.topRows<3>() = rot_rows;
    m.bottomRows<3>() = trans_rows;
    block.jacobians.push_back({state, tag, std::move(m)});
  };
  entry(k, Block::kTheta, j.rot_wrt_qk, j.trans_wrt_qk);
  entry(k + 1, Block::kTheta, j.rot_wrt_qk1, Mat3::Zero());
  entry(k, Block::kPos, Mat3::Zero(), j.trans_wrt_pk);
  entry(k + 1, Block::kPos, Mat3::Zero(), j.trans_wrt_pk1);
  return block;
}

ResidualBlock make_imu_block(int k, const NavState& xk, const NavState& xk1,
                             const Preintegration& pre, const Vec3& gravity) {
  ResidualBlock block;
  block.family = ResidualBlock::Family::kImu;
  block.residual = imu_residual(xk, xk1, pre, gravity);

  // covariance rows are (d_alpha, d_beta, d_theta, d_bg, d_ba); the residual
  // is ordered (gamma, alpha, beta, bg, ba).
  static const int remap[15] = {6, 7, 8, 0, 1, 2, 3, 4, 5, 9, 10, 11, 12, 13, 14};
  Mat15 cov;
  for (int i = 0; i < 15; ++i)
    for (int jj = 0; jj < 15; ++jj) cov(i, jj) = pre.covariance(remap[i], remap[jj]);

  Eigen::LLT<Mat15> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("make_imu_block: preintegration covariance not PD");
  }
  Mat15 w = Mat15::Identity();
  llt.matrixL().solveInPlace(w);  // w = L^-1, w^T w = cov^-1
  block.sqrt_info = w;

  const ImuJacobians j = imu_jacobians(xk, xk1, pre, gravity);
  auto entry = [&](int state, Block tag, std::initializer_list<std::pair<int, Mat3>> rows) {
    MatX m = MatX::Zero(15, 3);
    for (const auto& [row, mat] : rows) m.middleRows<3>(row) = mat;
    block.jacobians.push_back({state, tag, std::move(m)});
  };
  const Mat3 eye = Mat3::Identity();
  entry(k, Block::kTheta, {{0, j.gamma_wrt_qk}, {3, j.alpha_wrt_qk}, {6, j.beta_wrt_qk}});
  entry(k + 1, Block::kTheta, {{0, j.gamma_wrt_qk1}});
  entry(k, Block::kPos, {{3, j.alpha_wrt_pk}});
  entry(k + 1, Block::kPos, {{3, j.alpha_wrt_pk1}});
  entry(k, Block::kVel, {{3, j.alpha_wrt_vk}, {6, j.beta_wrt_vk}});
  entry(k + 1, Block::kVel, {{6, j.beta_wrt_vk1}});
  entry(k, Block::kBg,
        {{0, j.gamma_wrt_bgk}, {3, j.alpha_wrt_bgk}, {6, j.beta_wrt_bgk}, {9, -eye}});
  entry(k + 1, Block::kBg, {{9, eye}});
  entry(k, Block::kBa, {{3, j.alpha_wrt_bak}, {6, j.beta_wrt_bak}, {12, -eye}});
  entry(k + 1, Block::kBa, {{12, eye}});
  return block;
}

std::optional<ResidualBlock> make_uwb_block(int k, const NavState& xk,
                                            const NavState& xk1,
                                            const UwbObservation& obs) {
  const Vec3 n = uwb_predicted_vector(xk, xk1, obs);
  if (n.norm() < kDegenerateRange) return std::nullopt;

  ResidualBlock block;
  block.family = ResidualBlock::Family::kUwb;
  block.residual = VecX::Constant(1, n.norm() - obs.range);
  block.sqrt_info = MatX::Constant(1, 1, 1.0 / obs.sigma);

  const UwbJacobians j = uwb_jacobians(xk, xk1, obs);
  auto entry = [&](int state, Block tag, const RowVec3& row) {
    block.jacobians.push_back({state, tag, MatX(row)});
  };
  entry(k + 1, Block::kPos, j.wrt_pk1);
  entry(k, Block::kVel, j.wrt_vk);
  entry(k + 1, Block::kVel, j.wrt_vk1);
  entry(k, Block::kTheta, j.wrt_qk);
  entry(k + 1, Block::kTheta, j.wrt_qk1);
  return block;
}

ResidualBlock make_prior_block(int k, const NavState& current, const NavState& anchor,
                               double sigma_theta, double sigma_p) {
  ResidualBlock block;
  block.family = ResidualBlock::Family::kPrior;

  const Quat err = anchor.q.conjugate() * current.q;
  const double sign = quat_sign(err);
  Vec6 r;
  r.head<3>() = two_vec(err);
  r.tail<3>() = current.p - anchor.p;
  block.residual = r;

  Vec6 inv_sqrt;
  inv_sqrt.head<3>().setConstant(1.0 / sigma_theta);
  inv_sqrt.tail<3>().setConstant(1.0 / sigma_p);
  block.sqrt_info = inv_sqrt.asDiagonal();

  MatX j_theta = MatX::Zero(6, 3);
  j_theta.topRows<3>() = sign * brc3(left_matrix(err));
  block.jacobians.push_back({k, Block::kTheta, std::move(j_theta)});
  MatX j_pos = MatX::Zero(6, 3);
  j_pos.bottomRows<3>() = Mat3::Identity();
  block.jacobians.push_back({k, Block::kPos, std::move(j_pos)});
  return block;
}

}  // namespace rio
