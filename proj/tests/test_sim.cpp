#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rio/manifold.hpp"
#include "rio/sim.hpp"

using namespace rio;

namespace {

const Vec3 kGravity(0.0, 0.0, 9.81);

TrajectorySpec gentle_spec(double duration = 20.0) {
  TrajectorySpec spec;
  spec.amplitude = Vec3(1.5, 1.2, 0.5);
  spec.omega = Vec3(0.4, 0.4, 0.6);
  spec.center = Vec3(0.0, 0.0, 1.5);
  spec.yaw_profile = YawProfile::kFollowVelocity;
  spec.duration = duration;
  return spec;
}

}  // namespace

TEST_CASE("imu synthesis: noise-free samples equal the analytic signals") {
  SensorRig rig = default_rig();
  rig.imu_noise_enabled = false;
  const Trajectory traj(gentle_spec(5.0), kGravity);
  const auto samples = synth_imu(traj, rig, 1);

  CHECK(samples.size() == 5 * 400 + 1);
  for (size_t i = 1; i < samples.size(); ++i) {
    CHECK(samples[i].stamp - samples[i - 1].stamp ==
          doctest::Approx(0.0025).epsilon(1e-12));
  }
  for (size_t i = 0; i < samples.size(); i += 321) {
    const TrajectorySample s = traj.sample(samples[i].stamp);
    CHECK((samples[i].gyro - s.omega_body).norm() == 0.0);
    CHECK((samples[i].accel - s.accel_body).norm() == 0.0);
  }
}

TEST_CASE("imu synthesis: discrete noise variance matches sigma^2 * rate") {
  SensorRig rig = default_rig();
  rig.imu_noise.sigma_gyro = 2e-3;
  rig.imu_noise.sigma_gyro_walk = 0.0;  // isolate the white component
  rig.imu_noise.sigma_accel_walk = 0.0;
  TrajectorySpec spec;
  spec.amplitude.setZero();  // static: the signal is constant
  spec.duration = 25.0;      // 10^4 samples at 400 Hz
  const Trajectory traj(spec, kGravity);

  const auto samples = synth_imu(traj, rig, 7);
  REQUIRE(samples.size() >= 10000);
  double mean = 0.0, m2 = 0.0;
  int n = 0;
  for (const auto& s : samples) {
    ++n;
    const double v = s.gyro.x();
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  const double var = m2 / (n - 1);
  const double expected = 2e-3 * 2e-3 * 400.0;
  CHECK(std::abs(var - expected) / expected < 0.05);
}

TEST_CASE("uwb synthesis follows the ranging cycle") {
  SensorRig rig = default_rig();
  rig.uwb_sigma = 0.0;
  TrajectorySpec spec;
  spec.amplitude.setZero();
  spec.center = Vec3(0.4, -0.2, 1.1);
  spec.yaw_fixed = 0.7;
  spec.duration = 1.0;
  const Trajectory traj(spec, kGravity);
  const auto records = synth_uwb(traj, rig, 3);

  // Two simultaneous measurements per 25 ms slot.
  CHECK(records[0].stamp == 0.0);
  CHECK(records[1].stamp == 0.0);
  CHECK(records[2].stamp == doctest::Approx(0.025));

  // Node 200 cycle and the two-anchor shift of node 201.
  const int expected200[8] = {100, 100, 101, 101, 102, 102, 103, 103};
  const int expected201[8] = {102, 102, 103, 103, 100, 100, 101, 101};
  const char* expected_ant[8] = {"A", "B", "A", "B", "A", "B", "A", "B"};
  for (int j = 0; j < 16; ++j) {
    const auto& rec = records[j];
    const int slot = j / 2;
    if (rec.node == 200) {
      CHECK(rec.anchor == expected200[slot % 8]);
    } else {
      CHECK(rec.node == 201);
      CHECK(rec.anchor == expected201[slot % 8]);
    }
    CHECK(rec.antenna == expected_ant[slot % 8]);
  }

  // Exactly 8 ranges per node per full cycle, by counting.
  int count200 = 0, count201 = 0;
  for (int j = 0; j < 16; ++j) {
    (records[j].node == 200 ? count200 : count201)++;
  }
  CHECK(count200 == 8);
  CHECK(count201 == 8);

  // Zero-noise static ranges equal the geometric distances.
  const TrajectorySample s = traj.sample(0.0);
  for (int j = 0; j < 16; ++j) {
    const auto& rec = records[j];
    const Vec3 antenna =
        rig.antennas.at(std::to_string(rec.node) + "." + rec.antenna);
    const double d =
        (s.p + quat_to_rot(s.q) * antenna - rig.anchors.positions.at(rec.anchor)).norm();
    CHECK(rec.range == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("uwb outlier and dropout injection") {
  SensorRig rig = default_rig();
  rig.outliers.prob = 1.0;
  rig.outliers.bias = 1.5;
  rig.outliers.t_begin = 0.0;
  rig.outliers.t_end = 10.0;
  rig.outliers.anchors = {102};
  rig.uwb_dropouts.push_back({100, 0.2, 0.4});
  rig.uwb_sigma = 0.0;

  TrajectorySpec spec;
  spec.amplitude.setZero();
  spec.center = Vec3(0, 0, 1);
  spec.duration = 1.0;
  const Trajectory traj(spec, kGravity);
  const auto records = synth_uwb(traj, rig, 5);

  const TrajectorySample s = traj.sample(0.0);
  for (const auto& rec : records) {
    CHECK(!(rec.anchor == 100 && rec.stamp >= 0.2 && rec.stamp <= 0.4));
    const Vec3 antenna =
        rig.antennas.at(std::to_string(rec.node) + "." + rec.antenna);
    const double d =
        (s.p + quat_to_rot(s.q) * antenna - rig.anchors.positions.at(rec.anchor)).norm();
    if (rec.anchor == 102) {
      CHECK(rec.range == doctest::Approx(d + 1.5).epsilon(1e-12));
    } else {
      CHECK(rec.range == doctest::Approx(d).epsilon(1e-12));
    }
  }
}

TEST_CASE("osl synthesis: zero noise reproduces ground truth in the initial frame") {
  OslStreamParams params;
  params.sigma.setZero();
  const Trajectory traj(gentle_spec(10.0), kGravity);
  const auto stream = synth_osl(traj, params, 10.0, 11);

  const TrajectorySample s0 = traj.sample(0.0);
  for (size_t k = 0; k < stream.size(); k += 13) {
    const TrajectorySample s = traj.sample(stream[k].stamp);
    const Vec3 expected_p = quat_to_rot(s0.q).transpose() * (s.p - s0.p);
    const Quat expected_q = s0.q.conjugate() * s.q;
    CHECK((stream[k].p - expected_p).norm() < 1e-9);
    CHECK(two_vec(expected_q.conjugate() * stream[k].q).norm() < 1e-9);
  }
}

TEST_CASE("osl drift grows like sqrt(duration) and streams are independent") {
  OslStreamParams a, b;
  a.name = "left";
  b.name = "right";
  const Trajectory traj(gentle_spec(100.0), kGravity);

  const int runs = 200;
  double sq25 = 0.0, sq100 = 0.0;
  double cross = 0.0;
  for (int run = 0; run < runs; ++run) {
    const auto sa = synth_osl(traj, a, 100.0, 1000 + run);
    const auto sb = synth_osl(traj, b, 100.0, 1000 + run);

    auto drift_at = [&](const std::vector<OslPoseRecord>& s, double t) {
      const TrajectorySample s0 = traj.sample(0.0);
      size_t k = static_cast<size_t>(t * a.rate);
      const TrajectorySample g = traj.sample(s[k].stamp);
      const Vec3 expected = quat_to_rot(s0.q).transpose() * (g.p - s0.p);
      return Vec3(s[k].p - expected);
    };
    sq25 += drift_at(sa, 25.0).squaredNorm();
    sq100 += drift_at(sa, 100.0).squaredNorm();
    cross += drift_at(sa, 100.0).dot(drift_at(sb, 100.0));
  }
  const double rms25 = std::sqrt(sq25 / runs);
  const double rms100 = std::sqrt(sq100 / runs);
  const double ratio = rms100 / rms25;
  CHECK(ratio > 2.0 * 0.75);
  CHECK(ratio < 2.0 * 1.25);

  // Cross-correlation of terminal drifts across independent streams ~ 0.
  const double corr = cross / runs / (rms100 * rms100);
  CHECK(std::abs(corr) < 0.15);
}

TEST_CASE("simulation is deterministic under a fixed seed") {
  SensorRig rig = default_rig();
  OslStreamParams osl;
  rig.osl_streams.push_back(osl);
  TrajectorySpec spec = gentle_spec(3.0);

  const SimDataset a = simulate(spec, rig, 99);
  const SimDataset b = simulate(spec, rig, 99);

  REQUIRE(a.imu.size() == b.imu.size());
  for (size_t i = 0; i < a.imu.size(); ++i) {
    CHECK((a.imu[i].gyro - b.imu[i].gyro).norm() == 0.0);
    CHECK((a.imu[i].accel - b.imu[i].accel).norm() == 0.0);
  }
  REQUIRE(a.uwb.size() == b.uwb.size());
  for (size_t i = 0; i < a.uwb.size(); ++i) {
    CHECK(a.uwb[i].range == b.uwb[i].range);
  }
  const auto& sa = a.osl.at("osl0");
  const auto& sb = b.osl.at("osl0");
  REQUIRE(sa.size() == sb.size());
  for (size_t i = 0; i < sa.size(); ++i) {
    CHECK((sa[i].p - sb[i].p).norm() == 0.0);
  }

  const SimDataset c = simulate(spec, rig, 100);
  CHECK(c.uwb[0].range != a.uwb[0].range);
}
