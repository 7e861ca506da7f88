#pragma once

#include <vector>

#include "rio/types.hpp"

namespace rio {

enum class TrajectoryKind { kLissajous, kWaypointLattice, kVerticalPlaneScan };
enum class YawProfile { kFixed, kFollowVelocity };

/// Twice continuously differentiable position profiles. Lissajous uses the
/// per-axis amplitudes/frequencies directly; the waypoint kinds traverse a
/// grid spanned by the amplitudes with quintic segments (rest-to-rest, so the
/// profile stays C^2 at the joins) whose total time is `duration`.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kLissajous;
  Vec3 amplitude{2.0, 1.5, 0.75};
  Vec3 omega{0.35, 0.35, 0.8};  // rad/s (lissajous)
  Vec3 center{0.0, 0.0, 1.5};
  YawProfile yaw_profile = YawProfile::kFixed;
  double yaw_fixed = 0.0;  // rad
  double duration = 60.0;  // s
};

/// Ground-truth kinematic state at time t: attitude, position, velocity,
/// body angular rate and the accelerometer specific force R^T (p_ddot + g),
/// all bias- and noise-free.
struct TrajectorySample {
  Quat q;
  Vec3 p;
  Vec3 v;
  Vec3 omega_body;
  Vec3 accel_body;
};

class Trajectory {
 public:
  Trajectory(const TrajectorySpec& spec, const Vec3& gravity);

  /// Throws std::out_of_range outside [0, duration].
  TrajectorySample sample(double t) const;

  double duration() const { return spec_.duration; }

 private:
  struct Kinematics {
    Vec3 p, v, a;       // world frame
    double yaw, yaw_rate;
  };
  Kinematics evaluate(double t) const;
  Kinematics evaluate_lissajous(double t) const;
  Kinematics evaluate_waypoints(double t) const;

  TrajectorySpec spec_;
  Vec3 gravity_;
  std::vector<Vec3> waypoints_;
  std::vector<double> segment_yaw_;  // follow-velocity target per segment
  double segment_time_ = 0.0;
};

}  // namespace rio
