#pragma once

#include <stdexcept>

#include "rio/types.hpp"

namespace rio {

/// Pose displacement from one odometry stream over one interval: relative
/// rotation dq and body-frame translation dp between consecutive nodes.
/// The error covariance is dt * diag(sigma^2), sigma = (rot x3, trans x3).
struct OslDisplacement {
  Quat dq = Quat::Identity();
  Vec3 dp = Vec3::Zero();
  double dt = 0.1;                            // s
  Vec6 sigma = (Vec6() << 0.02, 0.02, 0.02,  // rad/sqrt(s)
                0.1, 0.1, 0.1)                // m/sqrt(s)
                   .finished();
};

/// One body-offset range: distance `range` measured from the antenna at
/// body-frame offset `antenna` to `anchor` (world frame), `dt` seconds after
/// the start of an interval of length `step`.
struct UwbObservation {
  double range = 0.0;            // m
  Vec3 anchor = Vec3::Zero();    // world
  Vec3 antenna = Vec3::Zero();   // body
  double dt = 0.0;               // s, 0 < dt <= step
  double step = 0.1;             // s
  double sigma = 0.05;           // m

  void validate() const {
    if (!(dt > 0.0) || dt > step) {
      throw std::invalid_argument("UwbObservation: dt must satisfy 0 < dt <= step");
    }
    if (range < 0.0 || sigma <= 0.0) {
      throw std::invalid_argument("UwbObservation: negative range or sigma");
    }
  }
};

}  // namespace rio
