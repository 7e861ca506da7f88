#pragma once

#include <vector>

#include "rio/types.hpp"

namespace rio {

/// One gyro + accelerometer sample. The accelerometer reports specific force
/// including the gravity reaction: at rest with identity attitude it reads
/// (0, 0, +g).
struct ImuSample {
  double stamp = 0.0;  // seconds
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // m/s^2
};

struct ImuBias {
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // m/s^2
};

/// Continuous-time noise densities (per sqrt(Hz)) plus the gravity vector.
/// Gravity convention: g = (0, 0, +9.81) with +z up; world acceleration is
/// R (accel - ba) - g.
struct ImuNoiseParams {
  double sigma_gyro = 2e-3;        // rad/s/sqrt(Hz)
  double sigma_accel = 1e-2;       // m/s^2/sqrt(Hz)
  double sigma_gyro_walk = 1e-5;   // rad/s^2/sqrt(Hz)
  double sigma_accel_walk = 1e-4;  // m/s^3/sqrt(Hz)
  Vec3 gravity{0.0, 0.0, 9.81};
};

/// IMU samples covering exactly [t_begin, t_end]; samples.front().stamp ==
/// t_begin and an interpolated boundary sample sits at t_end (zero hold).
struct ImuSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<ImuSample> samples;
};

}  // namespace rio
