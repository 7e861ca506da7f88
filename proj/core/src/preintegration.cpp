#include "rio/preintegration.hpp"

#include <stdexcept>

#include "rio/manifold.hpp"

namespace rio {

void Preintegration::integrate_step(const ImuSample& sample, double next_stamp) {
  const double dtau = next_stamp - sample.stamp;
  if (dtau <= 0.0) {
    throw std::invalid_argument("Preintegration::integrate_step: non-increasing stamps");
  }

  const Vec3 w = sample.gyro - bias_point.gyro;
  const Vec3 a = sample.accel - bias_point.accel;
  const Mat3 rot = quat_to_rot(gamma);  // kR_n before this step

  propagate_covariance(w, a, rot, dtau);
  propagate_bias_jacobians(w, a, rot, dtau);

  // ZOH rules: alpha from the old beta and rotation, then beta, then gamma.
  alpha += beta * dtau + 0.5 * rot * a * dtau * dtau;
  beta += rot * a * dtau;
  gamma = (gamma * vec_to_quat(w * dtau)).normalized();

  duration += dtau;
  ++sample_count;
}

void Preintegration::propagate_covariance(const Vec3& gyro_corr, const Vec3& accel_corr,
                                          const Mat3& rot, double dtau) {
  // Error-state rows: (d_alpha, d_beta, d_theta, d_bg, d_ba);
  // noise columns: (eta_g, eta_a, eta_bg, eta_ba).
  Mat15 f = Mat15::Zero();
  f.block<3, 3>(0, 3) = Mat3::Identity();
  f.block<3, 3>(3, 6) = -rot * hat(accel_corr);
  f.block<3, 3>(3, 12) = -rot;
  f.block<3, 3>(6, 6) = -hat(gyro_corr);
  f.block<3, 3>(6, 9) = -Mat3::Identity();

  Eigen::Matrix<double, 15, 12> g = Eigen::Matrix<double, 15, 12>::Zero();
  g.block<3, 3>(3, 3) = -rot;
  g.block<3, 3>(6, 0) = -Mat3::Identity();
  g.block<3, 3>(9, 6) = Mat3::Identity();
  g.block<3, 3>(12, 9) = Mat3::Identity();

  Eigen::Matrix<double, 12, 1> sq;
  sq.segment<3>(0).setConstant(noise.sigma_gyro * noise.sigma_gyro);
  sq.segment<3>(3).setConstant(noise.sigma_accel * noise.sigma_accel);
  sq.segment<3>(6).setConstant(noise.sigma_gyro_walk * noise.sigma_gyro_walk);
  sq.segment<3>(9).setConstant(noise.sigma_accel_walk * noise.sigma_accel_walk);

  const Mat15 phi = Mat15::Identity() + f * dtau;  // first-order transition
  covariance = phi * covariance * phi.transpose() +
               g * sq.asDiagonal() * g.transpose() * dtau;
  covariance = 0.5 * (covariance + covariance.transpose()).eval();
}

void Preintegration::propagate_bias_jacobians(const Vec3& gyro_corr,
                                              const Vec3& accel_corr, const Mat3& rot,
                                              double dtau) {
  const Mat3 ra = rot * hat(accel_corr);

  // alpha uses the old beta/gamma Jacobians, beta the old gamma Jacobian.
  jac_alpha_gyro += jac_beta_gyro * dtau - 0.5 * ra * jac_gamma_gyro * dtau * dtau;
  jac_alpha_accel += jac_beta_accel * dtau - 0.5 * rot * dtau * dtau;
  jac_beta_gyro -= ra * jac_gamma_gyro * dtau;
  jac_beta_accel -= rot * dtau;

  const Vec3 wd = gyro_corr * dtau;
  jac_gamma_gyro = exp_so3(wd).transpose() * jac_gamma_gyro - right_jacobian(wd) * dtau;
}

Preintegration::Corrected Preintegration::corrected_for_bias(
    const ImuBias& new_bias) const {
  const Vec3 dbg = new_bias.gyro - bias_point.gyro;
  const Vec3 dba = new_bias.accel - bias_point.accel;
  Corrected out;
  out.alpha = alpha + jac_alpha_gyro * dbg + jac_alpha_accel * dba;
  out.beta = beta + jac_beta_gyro * dbg + jac_beta_accel * dba;
  out.gamma = (gamma * vec_to_quat(jac_gamma_gyro * dbg)).normalized();
  return out;
}

bool Preintegration::needs_reintegration(const ImuBias& new_bias, double gyro_threshold,
                                         double accel_threshold) const {
  return (new_bias.gyro - bias_point.gyro).norm() > gyro_threshold ||
         (new_bias.accel - bias_point.accel).norm() > accel_threshold;
}

Preintegration preintegrate(const ImuSegment& segment, const ImuBias& bias_point,
                            const ImuNoiseParams& noise) {
  Preintegration pre(bias_point, noise);
  const auto& s = segment.samples;
  for (size_t i = 0; i < s.size(); ++i) {
    const double next = (i + 1 < s.size()) ? s[i + 1].stamp : segment.t_end;
    if (next <= s[i].stamp) continue;  // zero-length boundary hold
    pre.integrate_step(s[i], next);
  }
  return pre;
}

NavState predict_state(const NavState& from, const ImuSegment& segment,
                       const Vec3& gravity) {
  if (segment.samples.empty()) return from;
  ImuNoiseParams noise;
  noise.gravity = gravity;
  const Preintegration pre = preintegrate(segment, ImuBias{from.bg, from.ba}, noise);

  const double dt = pre.duration;
  const Mat3 rot = quat_to_rot(from.q);
  NavState out;
  out.q = (from.q * pre.gamma).normalized();
  out.p = from.p + from.v * dt - 0.5 * gravity * dt * dt + rot * pre.alpha;
  out.v = from.v - gravity * dt + rot * pre.beta;
  out.bg = from.bg;
  out.ba = from.ba;
  return out;
}

}  // namespace rio
