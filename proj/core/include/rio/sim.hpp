#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rio/anchors.hpp"
#include "rio/imu_types.hpp"
#include "rio/trajectory.hpp"
#include "rio/types.hpp"

// Sensor synthesis on top of the analytic trajectories: IMU with white noise
// and random-walk biases, TDMA body-offset UWB ranging, and drifting
// odometry streams whose noise model matches the estimator's displacement
// factor exactly. Generation is pure; a fixed seed reproduces the record
// streams byte for byte.

namespace rio {

struct OslStreamParams {
  std::string name = "osl0";
  double rate = 10.0;  // Hz
  Vec6 sigma = (Vec6() << 0.02, 0.02, 0.02, 0.1, 0.1, 0.1).finished();
  std::vector<std::pair<double, double>> dropouts;  // silent [t0, t1] windows
};

struct UwbOutlierParams {
  double prob = 0.0;
  double bias = 0.0;  // m, added to affected ranges
  double t_begin = 0.0;
  double t_end = 1e18;
  std::vector<int> anchors;  // empty = all anchors affected
};

struct UwbAnchorDropout {
  int anchor = -1;
  double t_begin = 0.0;
  double t_end = 0.0;
};

/// One TDMA cycle entry: at its slot, `node`.`antenna` ranges to `anchor`.
struct RangingEntry {
  int node = 200;
  std::string antenna = "A";
  int anchor = 100;
};

struct SensorRig {
  std::map<std::string, Vec3> antennas;  // key "<node>.<antenna>", body frame
  AnchorMap anchors;
  // cycle[j] lists the (simultaneous) measurements fired at slot j mod size.
  std::vector<std::vector<RangingEntry>> cycle;
  double slot_period = 0.025;  // s
  double uwb_sigma = 0.05;     // m
  double imu_rate = 400.0;     // Hz
  ImuNoiseParams imu_noise;
  ImuBias initial_bias;
  bool imu_noise_enabled = true;
  std::vector<OslStreamParams> osl_streams;
  UwbOutlierParams outliers;
  std::vector<UwbAnchorDropout> uwb_dropouts;
  double flag_fail_prob = 0.0;  // probability a range carries a failed
                                // snr/leading-edge flag
};

/// Four anchors and two dual-antenna nodes, 25 ms slots, the node-200 cycle
/// stepping through the anchors with both antennas and node 201 shifted by
/// two anchors, giving two simultaneous ranges per slot (80 Hz).
SensorRig default_rig();

struct UwbRangeRecord {
  double stamp = 0.0;
  int node = 0;
  std::string antenna;
  int anchor = 0;
  double range = 0.0;
  bool snr_ok = true;
  bool edge_ok = true;
};

struct OslPoseRecord {
  double stamp = 0.0;
  Quat q = Quat::Identity();
  Vec3 p = Vec3::Zero();
};

struct GroundTruthRecord {
  double stamp = 0.0;
  Quat q = Quat::Identity();
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

std::vector<ImuSample> synth_imu(const Trajectory& traj, const SensorRig& rig,
                                 uint64_t seed);
std::vector<UwbRangeRecord> synth_uwb(const Trajectory& traj, const SensorRig& rig,
                                      uint64_t seed);
/// Pose stream in a local frame coinciding with the initial pose; per-step
/// relative motion corrupted with variance dt * sigma^2, so the error
/// accumulates as a random walk (drift).
std::vector<OslPoseRecord> synth_osl(const Trajectory& traj, const OslStreamParams& params,
                                     double duration, uint64_t seed);

struct SimDataset {
  std::vector<ImuSample> imu;
  std::map<std::string, std::vector<OslPoseRecord>> osl;
  std::vector<UwbRangeRecord> uwb;
  AnchorMap anchors;
  std::vector<GroundTruthRecord> ground_truth;
};

SimDataset simulate(const TrajectorySpec& spec, const SensorRig& rig, uint64_t seed);

}  // namespace rio
