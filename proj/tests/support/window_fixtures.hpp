#pragma once

#include <vector>

#include "rio/solver.hpp"
#include "rio/trajectory.hpp"
#include "support/imu_fixtures.hpp"

namespace rio::testing {

struct RangingSlot {
  int antenna;
  int anchor;
  double sigma;
};

struct RigLayout {
  std::vector<Vec3> anchors{{3, 3, 3}, {3, -3, 0.5}, {-3, -3, 3}, {-3, 3, 0.5}};
  std::vector<Vec3> antennas{
      {0.25, -0.25, 0}, {0.25, 0.25, 0}, {-0.25, 0.25, 0}, {-0.25, -0.25, 0}};
  // Per-interval ranging slots; empty means the default antenna/anchor cycle
  // at sigma 0.05.
  std::vector<RangingSlot> schedule;
};

/// Square deployment whose ranging schedule is closed under a simultaneous
/// 90-degree rotation of antennas and anchors: with the body at the array
/// center the range cost is exactly four-fold symmetric in yaw, so it has
/// four tied minima at 90-degree offsets sharing one position. The auxiliary
/// anchor (last slot, downweighted) perturbs the tie, leaving the wrong wells
/// as strict local minima with visibly higher cost. This is the multi-well
/// landscape that makes a yaw grid (and yaw nudging) necessary.
inline RigLayout symmetric_square_rig(bool with_tie_breaker = true) {
  RigLayout rig;
  rig.anchors = {{3, 3, 2.5}, {-3, 3, 2.5}, {-3, -3, 2.5}, {3, -3, 2.5}, {0, 5, 2.0}};
  rig.antennas = {{0.35, -0.35, 0}, {0.35, 0.35, 0}, {-0.35, 0.35, 0}, {-0.35, -0.35, 0}};
  rig.schedule = {{0, 0, 0.01}, {1, 1, 0.01}, {2, 2, 0.01}, {3, 3, 0.01},
                  {0, 1, 0.01}, {1, 2, 0.01}, {2, 3, 0.01}, {3, 0, 0.01}};
  if (with_tie_breaker) rig.schedule.push_back({0, 4, 0.10});
  return rig;
}

/// Window whose states are generated by dead-reckoning the sampled IMU
/// segments and whose observations are computed exactly from those states:
/// every factor is consistent to machine precision at the window's states.
inline SlidingWindow consistent_window(const Trajectory& traj, double t0, int n_states,
                                       double step, const RigLayout& rig,
                                       int uwb_per_interval, const Vec3& gravity,
                                       double imu_rate = 400.0,
                                       const ImuNoiseParams& imu_noise = ImuNoiseParams{}) {
  SlidingWindow window;
  const TrajectorySample s0 = traj.sample(t0);
  NavState x;
  x.q = s0.q;
  x.p = s0.p;
  x.v = s0.v;
  window.nodes.push_back({t0, x});

  for (int i = 0; i + 1 < n_states; ++i) {
    const double tk = t0 + i * step;
    WindowInterval interval;
    interval.imu = segment_from_trajectory(traj, tk, step, imu_rate);
    interval.preint = preintegrate(interval.imu, ImuBias{}, imu_noise);

    const NavState& xk = window.nodes.back().state;
    const NavState xk1 = predict_state(xk, interval.imu, gravity);

    OslDisplacement osl;
    osl.dq = xk.q.conjugate() * xk1.q;
    osl.dp = quat_to_rot(xk.q).transpose() * (xk1.p - xk.p);
    osl.dt = step;
    interval.osl.push_back(osl);

    const int slots =
        rig.schedule.empty() ? uwb_per_interval : static_cast<int>(rig.schedule.size());
    for (int j = 0; j < slots; ++j) {
      UwbObservation obs;
      obs.dt = (j + 1) * step / slots;
      obs.step = step;
      if (rig.schedule.empty()) {
        obs.antenna = rig.antennas[j % rig.antennas.size()];
        obs.anchor = rig.anchors[(j / 2) % rig.anchors.size()];
      } else {
        obs.antenna = rig.antennas[rig.schedule[j].antenna];
        obs.anchor = rig.anchors[rig.schedule[j].anchor];
        obs.sigma = rig.schedule[j].sigma;
      }
      obs.range = uwb_predicted_vector(xk, xk1, obs).norm();
      interval.uwb.push_back(obs);
    }

    window.nodes.push_back({tk + step, xk1});
    window.intervals.push_back(std::move(interval));
  }
  return window;
}

inline Trajectory static_trajectory(double yaw, double duration, const Vec3& gravity,
                                    const Vec3& position = Vec3(0.5, -0.3, 1.0)) {
  TrajectorySpec spec;
  spec.amplitude.setZero();
  spec.center = position;
  spec.yaw_fixed = yaw;
  spec.duration = duration;
  return Trajectory(spec, gravity);
}

inline Trajectory gentle_lissajous(double duration, const Vec3& gravity) {
  TrajectorySpec spec;
  spec.amplitude = Vec3(1.5, 1.2, 0.5);
  spec.omega = Vec3(0.4, 0.4, 0.6);
  spec.center = Vec3(0.0, 0.0, 1.5);
  spec.yaw_profile = YawProfile::kFollowVelocity;
  spec.duration = duration;
  return Trajectory(spec, gravity);
}

}  // namespace rio::testing
