#pragma once

#include "rio/manifold.hpp"
#include "rio/types.hpp"

namespace rio {

/// One sliding-window node: attitude (body-to-world), position, velocity and
/// IMU biases. The per-state tangent layout is (theta, p, v, bg, ba).
struct NavState {
  Quat q = Quat::Identity();
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 bg = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
};

inline constexpr int kStateDof = 15;

/// Tangent offsets into the per-state 15-dim block.
enum class Block : int { kTheta = 0, kPos = 3, kVel = 6, kBg = 9, kBa = 12 };

inline int block_offset(Block b) { return static_cast<int>(b); }

/// Manifold update; the rotation uses q o E(dtheta) unless the first-order
/// form is requested.
inline NavState retract(const NavState& x, const Vec15& delta,
                        bool approximate_rotation = false) {
  NavState out;
  const Vec3 dtheta = delta.segment<3>(0);
  out.q = approximate_rotation ? retract_rotation_approx(x.q, dtheta)
                               : retract_rotation(x.q, dtheta);
  out.p = x.p + delta.segment<3>(3);
  out.v = x.v + delta.segment<3>(6);
  out.bg = x.bg + delta.segment<3>(9);
  out.ba = x.ba + delta.segment<3>(12);
  return out;
}

}  // namespace rio
