#pragma once

#include "rio/imu_types.hpp"
#include "rio/nav_state.hpp"
#include "rio/types.hpp"

namespace rio {

// Accumulates IMU samples between two window nodes into the preintegrated
// observation (alpha, beta, gamma), its bias Jacobians and the 15x15 error
// covariance over (d_alpha, d_beta, d_theta, d_bg, d_ba), all linearized at
// bias_point. Integration is zero-order hold; each sample is held from its
// own stamp to the next stamp.
//
// A Preintegration is a single-writer accumulator; completed values are plain
// data and safe to share.
struct Preintegration {
  Vec3 alpha = Vec3::Zero();  // m
  Vec3 beta = Vec3::Zero();   // m/s
  Quat gamma = Quat::Identity();

  Mat3 jac_alpha_gyro = Mat3::Zero();   // d alpha / d bg
  Mat3 jac_alpha_accel = Mat3::Zero();  // d alpha / d ba
  Mat3 jac_beta_gyro = Mat3::Zero();
  Mat3 jac_beta_accel = Mat3::Zero();
  Mat3 jac_gamma_gyro = Mat3::Zero();  // d theta / d bg

  Mat15 covariance = Mat15::Zero();

  ImuBias bias_point;
  ImuNoiseParams noise;
  double duration = 0.0;
  int sample_count = 0;

  Preintegration() = default;
  Preintegration(const ImuBias& bias, const ImuNoiseParams& noise_params)
      : bias_point(bias), noise(noise_params) {}

  /// Holds `sample` over [sample.stamp, next_stamp] and advances the deltas,
  /// bias Jacobians and covariance together. Throws std::invalid_argument on
  /// non-increasing stamps.
  void integrate_step(const ImuSample& sample, double next_stamp);

  struct Corrected {
    Vec3 alpha;
    Vec3 beta;
    Quat gamma;
  };

  /// First-order bias correction around bias_point. Valid while the bias
  /// change stays below the repropagation thresholds; otherwise re-integrate.
  Corrected corrected_for_bias(const ImuBias& new_bias) const;

  bool needs_reintegration(const ImuBias& new_bias, double gyro_threshold = 1e-2,
                           double accel_threshold = 1e-1) const;

 private:
  // Both use the pre-update rotation/velocity; integrate_step sequences them
  // before the delta updates.
  void propagate_covariance(const Vec3& gyro_corr, const Vec3& accel_corr,
                            const Mat3& rot, double dtau);
  void propagate_bias_jacobians(const Vec3& gyro_corr, const Vec3& accel_corr,
                                const Mat3& rot, double dtau);
};

/// Integrates a whole segment at the given linearization bias.
Preintegration preintegrate(const ImuSegment& segment, const ImuBias& bias_point,
                            const ImuNoiseParams& noise);

/// Dead-reckons a state through an IMU segment using the state's own biases:
/// p' = p + v dt - 1/2 g dt^2 + R alpha, v' = v - g dt + R beta,
/// q' = q o gamma. An empty segment returns `from` unchanged.
NavState predict_state(const NavState& from, const ImuSegment& segment,
                       const Vec3& gravity);

}  // namespace rio
