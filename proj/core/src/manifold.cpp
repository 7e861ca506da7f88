#include "rio/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace rio {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
      v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

namespace {

Vec3 vee_unchecked(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

}  // namespace

Vec3 vee(const Mat3& m) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("vee: input matrix is not skew-symmetric");
  }
  return vee_unchecked(m);
}

Mat3 exp_so3(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  double a, b;  // sin t / t, (1 - cos t) / t^2
  if (t < kSmallAngle) {
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / t2;
  }
  const Mat3 k = hat(phi);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 log_so3(const Mat3& r) {
  const double cos_theta = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const Vec3 w = 0.5 * vee_unchecked(r - r.transpose());  // = sin(theta) * axis
  // atan2 keeps full precision where acos((tr-1)/2) would lose half the
  // digits near theta = pi.
  const double theta = std::atan2(w.norm(), cos_theta);

  if (theta < kSmallAngle) {
    return w * (1.0 + theta * theta / 6.0);
  }
  if (theta > M_PI - kNearPiAngle) {
    // sin(theta) -> 0: take the axis from R + R^T = 2 cos(theta) I
    // + 2 (1 - cos(theta)) u u^T instead.
    const Mat3 uut =
        ((r + r.transpose()) * 0.5 - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
    int k = 0;
    uut.diagonal().maxCoeff(&k);
    Vec3 u = uut.col(k) / std::sqrt(uut(k, k));
    const double along = u.dot(w);
    if (std::abs(along) > 1e-12) {
      if (along < 0.0) u = -u;
    } else {
      // Exactly pi: sign convention is a nonnegative last nonzero component.
      for (int i = 2; i >= 0; --i) {
        if (std::abs(u[i]) > 1e-12) {
          if (u[i] < 0.0) u = -u;
          break;
        }
      }
    }
    return theta * u;
  }
  return theta / w.norm() * w;
}

Mat3 right_jacobian(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  double b, c;  // (1 - cos t)/t^2, (t - sin t)/t^3
  if (t < kSmallAngle) {
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    b = (1.0 - std::cos(t)) / t2;
    c = (t - std::sin(t)) / (t2 * t);
  }
  const Mat3 k = hat(phi);
  return Mat3::Identity() - b * k + c * k * k;
}

Mat3 right_jacobian_inv(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  double c;  // 1/t^2 - (1 + cos t)/(2 t sin t) = 1/t^2 - cot(t/2)/(2t)
  if (t < kSmallAngle) {
    c = 1.0 / 12.0 + t2 / 720.0;
  } else {
    c = 1.0 / t2 - 0.5 * std::cos(0.5 * t) / (t * std::sin(0.5 * t));
  }
  const Mat3 k = hat(phi);
  return Mat3::Identity() + 0.5 * k + c * k * k;
}

Mat3 quat_to_rot(const Quat& q) {
  const Vec3 v = q.vec();
  return (2.0 * q.w() * q.w() - 1.0) * Mat3::Identity() + 2.0 * q.w() * hat(v) +
         2.0 * v * v.transpose();
}

Quat rot_to_quat(const Mat3& a) {
  const double tr = a.trace();
  double w, x, y, z;
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(tr + 1.0);
    w = 0.25 * s;
    x = (a(2, 1) - a(1, 2)) / s;
    y = (a(0, 2) - a(2, 0)) / s;
    z = (a(1, 0) - a(0, 1)) / s;
  } else if (a(0, 0) >= a(1, 1) && a(0, 0) >= a(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + a(0, 0) - a(1, 1) - a(2, 2));
    w = (a(2, 1) - a(1, 2)) / s;
    x = 0.25 * s;
    y = (a(0, 1) + a(1, 0)) / s;
    z = (a(0, 2) + a(2, 0)) / s;
  } else if (a(1, 1) >= a(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + a(1, 1) - a(0, 0) - a(2, 2));
    w = (a(0, 2) - a(2, 0)) / s;
    x = (a(0, 1) + a(1, 0)) / s;
    y = 0.25 * s;
    z = (a(1, 2) + a(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + a(2, 2) - a(0, 0) - a(1, 1));
    w = (a(1, 0) - a(0, 1)) / s;
    x = (a(0, 2) + a(2, 0)) / s;
    y = (a(1, 2) + a(2, 1)) / s;
    z = 0.25 * s;
  }
  Quat q(w, x, y, z);
  q.normalize();
  return q;
}

Quat vec_to_quat(const Vec3& phi) {
  const double t = phi.norm();
  if (t < kSmallAngle) {
    Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
    q.normalize();
    return q;
  }
  const double half = 0.5 * t;
  const Vec3 v = phi * (std::sin(half) / t);
  return Quat(std::cos(half), v.x(), v.y(), v.z());
}

Quat quat_mul(const Quat& q, const Quat& p) { return q * p; }

Mat4 left_matrix(const Quat& q) {
  Mat4 l;
  l(0, 0) = q.w();
  l.block<1, 3>(0, 1) = -q.vec().transpose();
  l.block<3, 1>(1, 0) = q.vec();
  l.block<3, 3>(1, 1) = q.w() * Mat3::Identity() + hat(q.vec());
  return l;
}

Mat4 right_matrix(const Quat& q) {
  Mat4 r;
  r(0, 0) = q.w();
  r.block<1, 3>(0, 1) = -q.vec().transpose();
  r.block<3, 1>(1, 0) = q.vec();
  r.block<3, 3>(1, 1) = q.w() * Mat3::Identity() - hat(q.vec());
  return r;
}

Mat3 brc3(const Mat4& m) { return m.block<3, 3>(1, 1); }

Quat retract_rotation(const Quat& q, const Vec3& dtheta) {
  Quat out = q * vec_to_quat(dtheta);
  out.normalize();
  return out;
}

Quat retract_rotation_approx(const Quat& q, const Vec3& dtheta) {
  Quat out = q * Quat(1.0, 0.5 * dtheta.x(), 0.5 * dtheta.y(), 0.5 * dtheta.z());
  out.normalize();
  return out;
}

Mat4 omega_matrix(const Vec3& w) {
  Mat4 m;
  m(0, 0) = 0.0;
  m.block<1, 3>(0, 1) = -w.transpose();
  m.block<3, 1>(1, 0) = w;
  m.block<3, 3>(1, 1) = -hat(w);
  return m;
}

Quat canonicalized(const Quat& q) {
  if (q.w() < 0.0) return Quat(-q.w(), -q.x(), -q.y(), -q.z());
  if (q.w() == 0.0) {
    // Tie-break on the first nonzero vector component.
    for (int i = 0; i < 3; ++i) {
      if (q.vec()[i] != 0.0) {
        if (q.vec()[i] < 0.0) return Quat(-q.w(), -q.x(), -q.y(), -q.z());
        break;
      }
    }
  }
  return q;
}

Vec4 quat_coeffs_wxyz(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }

Vec3 two_vec(const Quat& q) {
  const double sign = q.w() < 0.0 ? -1.0 : 1.0;
  return 2.0 * sign * q.vec();
}

}  // namespace rio
