#include <cmath>

#include "doctest.h"
#include "rio/manifold.hpp"
#include "rio/trajectory.hpp"

using namespace rio;

namespace {
const Vec3 kGravity(0.0, 0.0, 9.81);
}

TEST_CASE("static spec is an equilibrium") {
  TrajectorySpec spec;
  spec.amplitude.setZero();
  spec.duration = 10.0;
  const Trajectory traj(spec, kGravity);

  const auto s = traj.sample(3.0);
  CHECK(s.v.norm() == 0.0);
  CHECK(s.omega_body.norm() == 0.0);
  CHECK((s.accel_body - Vec3(0, 0, 9.81)).norm() < 1e-12);
  CHECK((s.p - spec.center).norm() == 0.0);

  CHECK_THROWS_AS(traj.sample(-0.1), std::out_of_range);
  CHECK_THROWS_AS(traj.sample(10.1), std::out_of_range);
}

TEST_CASE("circular xy motion has centripetal acceleration r w^2") {
  TrajectorySpec spec;
  spec.amplitude = Vec3(2.0, 2.0, 0.0);
  spec.omega = Vec3(0.7, 0.7, 0.0);
  spec.yaw_profile = YawProfile::kFollowVelocity;
  spec.duration = 30.0;
  const Trajectory traj(spec, kGravity);

  for (double t : {0.0, 1.7, 5.3, 12.9}) {
    const auto s = traj.sample(t);
    const Vec3 a_world = quat_to_rot(s.q) * s.accel_body - kGravity;
    CHECK(a_world.norm() == doctest::Approx(2.0 * 0.7 * 0.7).epsilon(1e-9));
  }
}

TEST_CASE("analytic velocity matches finite differences of position") {
  for (auto kind : {TrajectoryKind::kLissajous, TrajectoryKind::kWaypointLattice,
                    TrajectoryKind::kVerticalPlaneScan}) {
    TrajectorySpec spec;
    spec.kind = kind;
    spec.yaw_profile = kind == TrajectoryKind::kVerticalPlaneScan
                           ? YawProfile::kFixed
                           : YawProfile::kFollowVelocity;
    spec.duration = 60.0;
    const Trajectory traj(spec, kGravity);

    const double h = 1e-5;
    for (double t : {0.5, 7.3, 21.1, 42.7, 55.0}) {
      const Vec3 v_fd = (traj.sample(t + h).p - traj.sample(t - h).p) / (2 * h);
      CHECK((traj.sample(t).v - v_fd).norm() < 1e-6);

      const Vec3 a_fd = (traj.sample(t + h).v - traj.sample(t - h).v) / (2 * h);
      const auto s = traj.sample(t);
      const Vec3 a_world = quat_to_rot(s.q) * s.accel_body - kGravity;
      CHECK((a_world - a_fd).norm() < 1e-5);
    }
  }
}

TEST_CASE("body rate matches the attitude derivative") {
  TrajectorySpec spec;
  spec.kind = TrajectoryKind::kWaypointLattice;
  spec.yaw_profile = YawProfile::kFollowVelocity;
  spec.duration = 60.0;
  const Trajectory traj(spec, kGravity);

  const double h = 1e-6;
  for (double t : {1.0, 9.4, 23.8, 47.0}) {
    const auto s = traj.sample(t);
    const Quat dq = Quat(traj.sample(t - h).q.conjugate() * traj.sample(t + h).q);
    const Vec3 w_fd = log_so3(quat_to_rot(dq)) / (2 * h);
    CHECK((s.omega_body - w_fd).norm() < 1e-5);
  }
}

TEST_CASE("waypoint trajectories start and end at rest and stay in the box") {
  for (auto kind : {TrajectoryKind::kWaypointLattice, TrajectoryKind::kVerticalPlaneScan}) {
    TrajectorySpec spec;
    spec.kind = kind;
    spec.duration = 40.0;
    const Trajectory traj(spec, kGravity);

    CHECK(traj.sample(0.0).v.norm() < 1e-12);
    CHECK(traj.sample(spec.duration).v.norm() < 1e-12);

    for (double t = 0.0; t <= spec.duration; t += 0.37) {
      const Vec3 d = traj.sample(t).p - spec.center;
      CHECK(std::abs(d.x()) <= spec.amplitude.x() + 1e-9);
      CHECK(std::abs(d.y()) <= spec.amplitude.y() + 1e-9);
      CHECK(std::abs(d.z()) <= spec.amplitude.z() + 1e-9);
    }
  }
}
