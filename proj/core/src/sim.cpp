#include "rio/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rio/manifold.hpp"

namespace rio {

namespace {

// Stable per-stream seed derivation (splitmix64 over seed ^ salt).
uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t name_salt(const std::string& name) {
  uint64_t h = 1469598103934665603ULL;
  for (const char c : name) h = (h ^ static_cast<uint64_t>(c)) * 1099511628211ULL;
  return h;
}

Vec3 randn3(std::mt19937_64& rng, std::normal_distribution<double>& n01) {
  return {n01(rng), n01(rng), n01(rng)};
}

bool in_window(double t, double t0, double t1) { return t >= t0 && t <= t1; }

}  // namespace

SensorRig default_rig() {
  SensorRig rig;
  rig.antennas["200.A"] = Vec3(0.25, -0.25, 0);
  rig.antennas["200.B"] = Vec3(0.25, 0.25, 0);
  rig.antennas["201.A"] = Vec3(-0.25, 0.25, 0);
  rig.antennas["201.B"] = Vec3(-0.25, -0.25, 0);
  rig.anchors.positions[100] = Vec3(3, 3, 3);
  rig.anchors.positions[101] = Vec3(3, -3, 0.5);
  rig.anchors.positions[102] = Vec3(-3, -3, 3);
  rig.anchors.positions[103] = Vec3(-3, 3, 0.5);

  // Node 200 steps A/B through anchors 100..103; node 201 fires in the same
  // slots with the anchor sequence cyclically shifted by two.
  const int anchors200[8] = {100, 100, 101, 101, 102, 102, 103, 103};
  const int anchors201[8] = {102, 102, 103, 103, 100, 100, 101, 101};
  const char* ant[8] = {"A", "B", "A", "B", "A", "B", "A", "B"};
  rig.cycle.resize(8);
  for (int j = 0; j < 8; ++j) {
    rig.cycle[j].push_back({200, ant[j], anchors200[j]});
    rig.cycle[j].push_back({201, ant[j], anchors201[j]});
  }
  return rig;
}

std::vector<ImuSample> synth_imu(const Trajectory& traj, const SensorRig& rig,
                                 uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x1111));
  std::normal_distribution<double> n01(0.0, 1.0);

  const double dt = 1.0 / rig.imu_rate;
  const double sg = rig.imu_noise.sigma_gyro * std::sqrt(rig.imu_rate);
  const double sa = rig.imu_noise.sigma_accel * std::sqrt(rig.imu_rate);
  const double swg = rig.imu_noise.sigma_gyro_walk * std::sqrt(dt);
  const double swa = rig.imu_noise.sigma_accel_walk * std::sqrt(dt);

  Vec3 bg = rig.initial_bias.gyro;
  Vec3 ba = rig.initial_bias.accel;

  std::vector<ImuSample> out;
  const int n = static_cast<int>(std::floor(traj.duration() * rig.imu_rate));
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = i / rig.imu_rate;
    const TrajectorySample s = traj.sample(t);
    ImuSample m;
    m.stamp = t;
    m.gyro = s.omega_body + bg;
    m.accel = s.accel_body + ba;
    if (rig.imu_noise_enabled) {
      m.gyro += sg * randn3(rng, n01);
      m.accel += sa * randn3(rng, n01);
      bg += swg * randn3(rng, n01);
      ba += swa * randn3(rng, n01);
    }
    out.push_back(m);
  }
  return out;
}

std::vector<UwbRangeRecord> synth_uwb(const Trajectory& traj, const SensorRig& rig,
                                      uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x2222));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<UwbRangeRecord> out;
  const int slots = static_cast<int>(std::floor(traj.duration() / rig.slot_period));
  for (int j = 0; j <= slots; ++j) {
    const double t = j * rig.slot_period;
    const TrajectorySample s = traj.sample(t);
    const Mat3 rot = quat_to_rot(s.q);
    for (const auto& entry : rig.cycle[j % rig.cycle.size()]) {
      bool dropped = false;
      for (const auto& d : rig.uwb_dropouts) {
        if (d.anchor == entry.anchor && in_window(t, d.t_begin, d.t_end)) {
          dropped = true;
          break;
        }
      }
      // Draws happen regardless of dropout so silent windows do not shift
      // the rest of the stream.
      const double noise = rig.uwb_sigma * n01(rng);
      const double outlier_draw = u01(rng);
      const double flag_draw = u01(rng);
      if (dropped) continue;

      const std::string key = std::to_string(entry.node) + "." + entry.antenna;
      const Vec3 antenna = rig.antennas.at(key);
      const Vec3 anchor = rig.anchors.positions.at(entry.anchor);

      UwbRangeRecord rec;
      rec.stamp = t;
      rec.node = entry.node;
      rec.antenna = entry.antenna;
      rec.anchor = entry.anchor;
      rec.range = (s.p + rot * antenna - anchor).norm() + noise;

      const auto& ol = rig.outliers;
      const bool anchor_hit = ol.anchors.empty() ||
                              std::find(ol.anchors.begin(), ol.anchors.end(),
                                        entry.anchor) != ol.anchors.end();
      if (ol.prob > 0.0 && anchor_hit && in_window(t, ol.t_begin, ol.t_end) &&
          outlier_draw < ol.prob) {
        rec.range += ol.bias;
      }
      if (rig.flag_fail_prob > 0.0 && flag_draw < rig.flag_fail_prob) {
        (flag_draw < 0.5 * rig.flag_fail_prob ? rec.snr_ok : rec.edge_ok) = false;
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<OslPoseRecord> synth_osl(const Trajectory& traj, const OslStreamParams& params,
                                     double duration, uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, name_salt(params.name)));
  std::normal_distribution<double> n01(0.0, 1.0);

  const double dt = 1.0 / params.rate;
  const double sq_rot = std::sqrt(dt);

  std::vector<OslPoseRecord> out;
  Quat q_meas = Quat::Identity();
  Vec3 p_meas = Vec3::Zero();
  TrajectorySample prev = traj.sample(0.0);

  auto publish = [&](double t) {
    for (const auto& w : params.dropouts) {
      if (in_window(t, w.first, w.second)) return;
    }
    out.push_back({t, q_meas, p_meas});
  };

  publish(0.0);
  const int n = static_cast<int>(std::floor(duration * params.rate));
  for (int k = 1; k <= n; ++k) {
    const double t = k / params.rate;
    const TrajectorySample cur = traj.sample(t);

    // True relative motion over the step, then the per-step measurement
    // corruption; chaining makes the error accumulate.
    const Quat dq = prev.q.conjugate() * cur.q;
    const Vec3 dp = quat_to_rot(prev.q).transpose() * (cur.p - prev.p);

    Vec3 phi, d;
    for (int i = 0; i < 3; ++i) {
      phi[i] = sq_rot * params.sigma[i] * n01(rng);
      d[i] = sq_rot * params.sigma[3 + i] * n01(rng);
    }

    p_meas = p_meas + quat_to_rot(q_meas) * (dp + d);
    q_meas = Quat(q_meas * dq * vec_to_quat(phi)).normalized();
    publish(t);
    prev = cur;
  }
  return out;
}

SimDataset simulate(const TrajectorySpec& spec, const SensorRig& rig, uint64_t seed) {
  const Trajectory traj(spec, rig.imu_noise.gravity);

  SimDataset data;
  data.imu = synth_imu(traj, rig, seed);
  data.uwb = synth_uwb(traj, rig, seed);
  for (const auto& stream : rig.osl_streams) {
    data.osl[stream.name] = synth_osl(traj, stream, traj.duration(), seed);
  }
  data.anchors = rig.anchors;

  const int n = static_cast<int>(std::floor(traj.duration() * rig.imu_rate));
  data.ground_truth.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = i / rig.imu_rate;
    const TrajectorySample s = traj.sample(t);
    data.ground_truth.push_back({t, s.q, s.p, s.v});
  }
  return data;
}

}  // namespace rio
