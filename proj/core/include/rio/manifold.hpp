#pragma once

#include "rio/types.hpp"

// SO(3) / quaternion primitives shared by the whole estimator.
//
// Conventions:
//  - quaternions are Hamilton, stored as Eigen::Quaterniond; where a 4-vector
//    layout matters (left/right product matrices, omega matrix) the order is
//    (w, x, y, z);
//  - a rotation vector phi encodes the rotation Exp(phi) with ||phi|| <= pi
//    when produced by log_so3;
//  - all series branches switch at kSmallAngle, the near-pi logarithm branch
//    at kNearPiAngle.

namespace rio {

inline constexpr double kSmallAngle = 1e-6;
inline constexpr double kNearPiAngle = 1e-4;

/// Skew-symmetric matrix of v, so that hat(a) * b == a x b.
Mat3 hat(const Vec3& v);

/// Inverse of hat(). Throws std::invalid_argument if m is not skew-symmetric
/// within 1e-9.
Vec3 vee(const Mat3& m);

/// Rodrigues formula: Exp(phi) = I + sin|phi|/|phi| [phi]x
///                             + (1-cos|phi|)/|phi|^2 [phi]x^2.
Mat3 exp_so3(const Vec3& phi);

/// Rotation-matrix logarithm, ||result|| <= pi. Near pi the axis is taken
/// from R + R^T; the sign at exactly pi picks a nonnegative last nonzero
/// axis component.
Vec3 log_so3(const Mat3& r);

/// Right Jacobian H(phi) of SO(3): Exp(phi + d) ~ Exp(phi) Exp(H(phi) d).
Mat3 right_jacobian(const Vec3& phi);

/// Closed-form inverse of right_jacobian().
Mat3 right_jacobian_inv(const Vec3& phi);

/// R(q) = (2 qw^2 - 1) I + 2 qw [qv]x + 2 qv qv^T.
Mat3 quat_to_rot(const Quat& q);

/// Shepperd-style conversion; the w-branch matches
/// qw = sqrt(a11 + a22 + a33 + 1) / 2 away from trace -1.
Quat rot_to_quat(const Mat3& r);

/// E(phi) = Q(Exp(phi)) = (cos(|phi|/2), phi/|phi| sin(|phi|/2)).
Quat vec_to_quat(const Vec3& phi);

/// Hamilton product q o p.
Quat quat_mul(const Quat& q, const Quat& p);

/// 4x4 left product matrix: q o p = left_matrix(q) * p (w-first layout).
Mat4 left_matrix(const Quat& q);

/// 4x4 right product matrix: q o p = right_matrix(p) * q (w-first layout).
Mat4 right_matrix(const Quat& q);

/// Bottom-right 3x3 block of a 4x4 matrix.
Mat3 brc3(const Mat4& m);

/// Exact rotation retraction q o E(dtheta), normalized.
Quat retract_rotation(const Quat& q, const Vec3& dtheta);

/// First-order retraction q o [1; dtheta/2], normalized.
Quat retract_rotation_approx(const Quat& q, const Vec3& dtheta);

/// Omega(w) = [0, -w^T; w, -[w]x]; quaternion kinematics read
/// qdot = 1/2 Omega(w) q in the (w, x, y, z) vector layout.
Mat4 omega_matrix(const Vec3& w);

/// Representative with nonnegative scalar part (for comparison and
/// serialization only; never applied silently inside arithmetic).
Quat canonicalized(const Quat& q);

/// Quaternion as a (w, x, y, z) column vector.
Vec4 quat_coeffs_wxyz(const Quat& q);

/// 2 * vec(q) with the sign of the scalar part folded in, the small-angle
/// reading of the rotation error between two nearby attitudes.
Vec3 two_vec(const Quat& q);

/// Rigid transform (R, t) acting as x -> R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
};

}  // namespace rio
