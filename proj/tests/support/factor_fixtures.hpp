#pragma once

#include <random>

#include "rio/factors.hpp"
#include "rio/nav_state.hpp"
#include "rio/observations.hpp"
#include "rio/preintegration.hpp"
#include "support/imu_fixtures.hpp"
#include "support/random_inputs.hpp"

namespace rio::testing {

/// A two-node configuration with moderate inter-state motion, the kind the
/// estimator actually linearizes around (keeps error quaternions away from
/// the w = 0 ambiguity).
struct StatePair {
  NavState xk, xk1;
};

inline StatePair random_state_pair(std::mt19937_64& rng) {
  StatePair s;
  s.xk.q = random_unit_quat(rng);
  s.xk.p = random_vec3(rng, 5.0);
  s.xk.v = random_vec3(rng, 2.0);
  s.xk.bg = random_vec3(rng, 0.02);
  s.xk.ba = random_vec3(rng, 0.1);

  s.xk1.q = retract_rotation(s.xk.q, random_vec3(rng, 0.25));
  s.xk1.p = s.xk.p + random_vec3(rng, 0.5);
  s.xk1.v = s.xk.v + random_vec3(rng, 0.4);
  s.xk1.bg = s.xk.bg + random_vec3(rng, 0.002);
  s.xk1.ba = s.xk.ba + random_vec3(rng, 0.01);
  return s;
}

inline OslDisplacement random_osl_obs(std::mt19937_64& rng, double dt = 0.1) {
  OslDisplacement obs;
  obs.dq = vec_to_quat(random_vec3(rng, 0.3));
  obs.dp = random_vec3(rng, 0.5);
  obs.dt = dt;
  return obs;
}

inline UwbObservation random_uwb_obs(std::mt19937_64& rng, double step = 0.1) {
  UwbObservation obs;
  std::uniform_real_distribution<double> udt(0.05 * step, step);
  std::uniform_real_distribution<double> urange(2.0, 9.0);
  obs.dt = udt(rng);
  obs.step = step;
  obs.antenna = random_vec3(rng, 0.35);
  obs.anchor = random_vec3(rng).normalized() * urange(rng) + Vec3(0, 0, 1.5);
  obs.range = urange(rng);
  return obs;
}

inline Preintegration random_preintegration(std::mt19937_64& rng, const NavState& xk,
                                            double span = 0.1) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const auto seg = wiggle_segment(u(rng), span, 400.0);
  ImuBias bias{xk.bg + random_vec3(rng, 0.003), xk.ba + random_vec3(rng, 0.02)};
  return preintegrate(seg, bias, ImuNoiseParams{});
}

}  // namespace rio::testing
