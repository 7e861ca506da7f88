#include "rio/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "rio/manifold.hpp"

namespace rio {

namespace {

// Quintic rest-to-rest blend: s(0)=0, s(1)=1, s'=s''=0 at both ends.
double quintic(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double quintic_d1(double u) { return 30.0 * u * u * (u - 1.0) * (u - 1.0); }
double quintic_d2(double u) { return 60.0 * u * (2.0 * u - 1.0) * (u - 1.0); }

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

double grid_coord(int i, int n) { return n > 1 ? -1.0 + 2.0 * i / (n - 1) : 0.0; }

}  // namespace

Trajectory::Trajectory(const TrajectorySpec& spec, const Vec3& gravity)
    : spec_(spec), gravity_(gravity) {
  if (spec_.kind == TrajectoryKind::kLissajous) return;

  if (spec_.kind == TrajectoryKind::kWaypointLattice) {
    const int nx = 3, ny = 3, nz = 2;
    for (int iz = 0; iz < nz; ++iz) {
      for (int jy = 0; jy < ny; ++jy) {
        const int iy = (iz % 2 == 0) ? jy : ny - 1 - jy;
        for (int jx = 0; jx < nx; ++jx) {
          const int ix = ((jy + iz) % 2 == 0) ? jx : nx - 1 - jx;
          waypoints_.push_back(spec_.center +
                               Vec3(spec_.amplitude.x() * grid_coord(ix, nx),
                                    spec_.amplitude.y() * grid_coord(iy, ny),
                                    spec_.amplitude.z() * grid_coord(iz, nz)));
        }
      }
    }
  } else {  // vertical plane scan: serpentine in x over z levels, y fixed
    const int nx = 4, nz = 3;
    for (int iz = 0; iz < nz; ++iz) {
      for (int jx = 0; jx < nx; ++jx) {
        const int ix = (iz % 2 == 0) ? jx : nx - 1 - jx;
        waypoints_.push_back(spec_.center +
                             Vec3(spec_.amplitude.x() * grid_coord(ix, nx), 0.0,
                                  spec_.amplitude.z() * grid_coord(iz, nz)));
      }
    }
  }

  const int n_seg = static_cast<int>(waypoints_.size()) - 1;
  segment_time_ = spec_.duration / n_seg;

  // Heading setpoint per segment from the horizontal leg direction.
  segment_yaw_.resize(n_seg);
  double prev = spec_.yaw_fixed;
  for (int i = 0; i < n_seg; ++i) {
    const Vec3 d = waypoints_[i + 1] - waypoints_[i];
    segment_yaw_[i] = d.head<2>().norm() > 1e-9 ? std::atan2(d.y(), d.x()) : prev;
    prev = segment_yaw_[i];
  }
}

Trajectory::Kinematics Trajectory::evaluate_lissajous(double t) const {
  const Vec3& a = spec_.amplitude;
  const Vec3& w = spec_.omega;
  Kinematics k;
  k.p = spec_.center + Vec3(a.x() * std::sin(w.x() * t), a.y() * std::cos(w.y() * t),
                            a.z() * std::sin(w.z() * t));
  k.v = Vec3(a.x() * w.x() * std::cos(w.x() * t), -a.y() * w.y() * std::sin(w.y() * t),
             a.z() * w.z() * std::cos(w.z() * t));
  k.a = Vec3(-a.x() * w.x() * w.x() * std::sin(w.x() * t),
             -a.y() * w.y() * w.y() * std::cos(w.y() * t),
             -a.z() * w.z() * w.z() * std::sin(w.z() * t));

  if (spec_.yaw_profile == YawProfile::kFollowVelocity) {
    const double h2 = k.v.x() * k.v.x() + k.v.y() * k.v.y();
    if (h2 > 1e-12) {
      k.yaw = std::atan2(k.v.y(), k.v.x());
      k.yaw_rate = (k.v.x() * k.a.y() - k.v.y() * k.a.x()) / h2;
    } else {
      k.yaw = spec_.yaw_fixed;
      k.yaw_rate = 0.0;
    }
  } else {
    k.yaw = spec_.yaw_fixed;
    k.yaw_rate = 0.0;
  }
  return k;
}

Trajectory::Kinematics Trajectory::evaluate_waypoints(double t) const {
  const int n_seg = static_cast<int>(waypoints_.size()) - 1;
  int i = static_cast<int>(t / segment_time_);
  if (i >= n_seg) i = n_seg - 1;
  const double u = (t - i * segment_time_) / segment_time_;
  const Vec3 d = waypoints_[i + 1] - waypoints_[i];

  Kinematics k;
  k.p = waypoints_[i] + quintic(u) * d;
  k.v = quintic_d1(u) / segment_time_ * d;
  k.a = quintic_d2(u) / (segment_time_ * segment_time_) * d;

  if (spec_.yaw_profile == YawProfile::kFollowVelocity) {
    const double prev = i > 0 ? segment_yaw_[i - 1] : segment_yaw_[0];
    const double dpsi = wrap_angle(segment_yaw_[i] - prev);
    // Slew the heading over the first half of the segment with the same
    // quintic so the yaw rate stays finite and C^1.
    const double blend_time = 0.5 * segment_time_;
    const double ub = std::min(t - i * segment_time_, blend_time) / blend_time;
    k.yaw = prev + quintic(ub) * dpsi;
    k.yaw_rate = (ub < 1.0) ? quintic_d1(ub) * dpsi / blend_time : 0.0;
  } else {
    k.yaw = spec_.yaw_fixed;
    k.yaw_rate = 0.0;
  }
  return k;
}

Trajectory::Kinematics Trajectory::evaluate(double t) const {
  return spec_.kind == TrajectoryKind::kLissajous ? evaluate_lissajous(t)
                                                  : evaluate_waypoints(t);
}

TrajectorySample Trajectory::sample(double t) const {
  if (t < 0.0 || t > spec_.duration) {
    throw std::out_of_range("Trajectory::sample: t outside [0, duration]");
  }
  const Kinematics k = evaluate(t);

  TrajectorySample s;
  s.q = vec_to_quat(Vec3(0.0, 0.0, k.yaw));  // zero roll/pitch
  s.p = k.p;
  s.v = k.v;
  s.omega_body = Vec3(0.0, 0.0, k.yaw_rate);
  s.accel_body = quat_to_rot(s.q).transpose() * (k.a + gravity_);
  return s;
}

}  // namespace rio
