#include "rio/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "rio/factors.hpp"
#include "rio/manifold.hpp"

namespace rio {

namespace {

// Linear interpolation of the IMU signal at t between two samples.
ImuSample interp_imu(const ImuSample& a, const ImuSample& b, double t) {
  if (b.stamp <= a.stamp) return {t, a.gyro, a.accel};
  const double s = (t - a.stamp) / (b.stamp - a.stamp);
  return {t, a.gyro + s * (b.gyro - a.gyro), a.accel + s * (b.accel - a.accel)};
}

// Geodesic pose interpolation at t between two stamped poses.
OslPoseRecord interp_pose(const OslPoseRecord& a, const OslPoseRecord& b, double t) {
  if (b.stamp <= a.stamp) return {t, a.q, a.p};
  const double s = (t - a.stamp) / (b.stamp - a.stamp);
  OslPoseRecord out;
  out.stamp = t;
  out.p = a.p + s * (b.p - a.p);
  const Vec3 phi = log_so3(quat_to_rot(a.q).transpose() * quat_to_rot(b.q));
  out.q = Quat(a.q * vec_to_quat(s * phi)).normalized();
  return out;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, AnchorMap anchors,
                   std::map<std::string, Vec3> antenna_offsets)
    : config_(std::move(config)),
      anchors_(std::move(anchors)),
      antenna_offsets_(std::move(antenna_offsets)) {
  fusion_.gravity = config_.imu_noise.gravity;
}

AdmitResult Pipeline::admit_imu(const ImuSample& sample) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!imu_buffer_.empty() &&
      sample.stamp < imu_buffer_.back().stamp - config_.reorder_tolerance) {
    return AdmitResult::kRejectedStale;
  }
  // Keep the buffer time-ordered even for slightly late arrivals.
  auto it = std::upper_bound(
      imu_buffer_.begin(), imu_buffer_.end(), sample.stamp,
      [](double t, const ImuSample& s) { return t < s.stamp; });
  imu_buffer_.insert(it, sample);
  return AdmitResult::kAccepted;
}

AdmitResult Pipeline::admit_osl(const std::string& stream, const OslPoseRecord& pose) {
  std::lock_guard<std::mutex> lock(mutex_);
  OslStream& s = osl_streams_[stream];
  if (!s.buffer.empty()) {
    if (pose.stamp < s.buffer.back().stamp - config_.reorder_tolerance) {
      return AdmitResult::kRejectedStale;
    }
    const double gap = pose.stamp - s.buffer.back().stamp;
    if (gap > 0) {
      s.gaps.push_back(gap);
      if (s.gaps.size() > 20) s.gaps.erase(s.gaps.begin());
      std::vector<double> sorted = s.gaps;
      std::sort(sorted.begin(), sorted.end());
      s.nominal_period = sorted[sorted.size() / 2];
    }
  }
  auto it = std::upper_bound(
      s.buffer.begin(), s.buffer.end(), pose.stamp,
      [](double t, const OslPoseRecord& r) { return t < r.stamp; });
  s.buffer.insert(it, pose);
  return AdmitResult::kAccepted;
}

AdmitResult Pipeline::admit_uwb(const UwbRangeRecord& record) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!record.snr_ok) return AdmitResult::kRejectedSnr;
  if (!record.edge_ok) return AdmitResult::kRejectedEdge;

  const std::string key = std::to_string(record.node) + "." + record.antenna;
  if (antenna_offsets_.find(key) == antenna_offsets_.end() ||
      anchors_.positions.find(record.anchor) == anchors_.positions.end()) {
    return AdmitResult::kRejectedUnknown;
  }
  if (!uwb_buffer_.empty() &&
      record.stamp < uwb_buffer_.back().stamp - config_.reorder_tolerance) {
    return AdmitResult::kRejectedStale;
  }

  const auto pair_key = std::make_tuple(record.node, record.antenna, record.anchor);
  const auto last = last_range_.find(pair_key);
  if (last != last_range_.end()) {
    const double dt = record.stamp - last->second.first;
    const double dd = std::abs(record.range - last->second.second);
    const bool too_fast = dt > 1e-9 ? (dd / dt > config_.rate_of_change_max) : dd > 1e-9;
    if (too_fast) return AdmitResult::kRejectedRate;
  }
  last_range_[pair_key] = {record.stamp, record.range};

  auto it = std::upper_bound(
      uwb_buffer_.begin(), uwb_buffer_.end(), record.stamp,
      [](double t, const UwbRangeRecord& r) { return t < r.stamp; });
  uwb_buffer_.insert(it, record);
  return AdmitResult::kAccepted;
}

ImuSegment Pipeline::extract_imu_segment(double t_begin, double t_end) const {
  ImuSegment seg;
  seg.t_begin = t_begin;
  seg.t_end = t_end;

  auto after = [&](double t) {
    return std::lower_bound(imu_buffer_.begin(), imu_buffer_.end(), t,
                            [](const ImuSample& s, double v) { return s.stamp < v; });
  };
  const auto first_inside = after(t_begin);
  if (first_inside == imu_buffer_.begin() && first_inside->stamp > t_begin) {
    // No sample at or before t_begin; hold the first one backwards.
    seg.samples.push_back({t_begin, first_inside->gyro, first_inside->accel});
  } else if (first_inside != imu_buffer_.begin()) {
    seg.samples.push_back(interp_imu(*(first_inside - 1), *first_inside, t_begin));
  } else {
    seg.samples.push_back({t_begin, first_inside->gyro, first_inside->accel});
  }

  auto it = first_inside;
  while (it != imu_buffer_.end() && it->stamp < t_end) {
    if (it->stamp > t_begin) seg.samples.push_back(*it);
    ++it;
  }
  if (it != imu_buffer_.end()) {
    seg.samples.push_back(it->stamp == t_end
                              ? *it
                              : interp_imu(*(it - 1), *it, t_end));
  } else {
    const ImuSample& back = imu_buffer_.back();
    seg.samples.push_back({t_end, back.gyro, back.accel});
  }
  return seg;
}

std::optional<OslDisplacement> Pipeline::osl_displacement(OslStream& stream,
                                                          double t_begin,
                                                          double t_end) const {
  if (stream.buffer.size() < 2 || stream.nominal_period <= 0.0) return std::nullopt;
  const double staleness = config_.osl_staleness_factor * stream.nominal_period;

  auto pose_at = [&](double t) -> std::optional<OslPoseRecord> {
    auto next = std::lower_bound(
        stream.buffer.begin(), stream.buffer.end(), t,
        [](const OslPoseRecord& r, double v) { return r.stamp < v; });
    if (next == stream.buffer.end()) return std::nullopt;
    if (next->stamp == t) return *next;
    if (next == stream.buffer.begin()) return std::nullopt;
    const auto prev = next - 1;
    // Both bracketing samples must be fresh enough at the boundary.
    if (t - prev->stamp > staleness || next->stamp - t > staleness) return std::nullopt;
    return interp_pose(*prev, *next, t);
  };

  const auto a = pose_at(t_begin);
  const auto b = pose_at(t_end);
  if (!a || !b) return std::nullopt;

  OslDisplacement obs;
  obs.dq = a->q.conjugate() * b->q;
  obs.dp = quat_to_rot(a->q).transpose() * (b->p - a->p);
  obs.dt = t_end - t_begin;
  obs.sigma = config_.osl_sigma;
  return obs;
}

std::optional<WindowInterval> Pipeline::create_step(double t_begin, double t_end,
                                                    bool gate_enabled,
                                                    StepResult* result) {
  if (imu_buffer_.empty() || imu_buffer_.back().stamp < t_end) return std::nullopt;

  WindowInterval interval;
  interval.imu = extract_imu_segment(t_begin, t_end);

  ImuBias bias;
  NavState predicted_end;
  const NavState* state_begin = nullptr;
  if (initialized_) {
    state_begin = &window_.nodes.back().state;
    bias = {state_begin->bg, state_begin->ba};
  }
  interval.preint = preintegrate(interval.imu, bias, config_.imu_noise);
  if (initialized_) {
    predicted_end = predict_state(*state_begin, interval.imu, fusion_.gravity);
  }

  for (auto& [name, stream] : osl_streams_) {
    auto obs = osl_displacement(stream, t_begin, t_end);
    if (!obs) continue;
    if (initialized_) {
      // Cross-check the stream against the IMU-predicted displacement; an
      // anomalous stream contributes no factor this interval.
      const Vec3 rot_diff = two_vec(interval.preint.gamma.conjugate() * obs->dq);
      const Vec3 dp_imu =
          quat_to_rot(state_begin->q).transpose() * (predicted_end.p - state_begin->p);
      const Vec3 trans_diff = obs->dp - dp_imu;
      bool anomalous = false;
      const double sq_dt = std::sqrt(obs->dt);
      for (int i = 0; i < 3; ++i) {
        if (std::abs(rot_diff[i]) >
                config_.outlier_gate_sigma * obs->sigma[i] * sq_dt ||
            std::abs(trans_diff[i]) >
                config_.outlier_gate_sigma * obs->sigma[3 + i] * sq_dt) {
          anomalous = true;
        }
      }
      if (anomalous) continue;
    }
    interval.osl.push_back(*obs);
    if (result) ++result->osl_used;
  }

  auto first = std::upper_bound(
      uwb_buffer_.begin(), uwb_buffer_.end(), t_begin,
      [](double t, const UwbRangeRecord& r) { return t < r.stamp; });
  for (auto it = first; it != uwb_buffer_.end() && it->stamp <= t_end; ++it) {
    UwbObservation obs;
    obs.range = it->range;
    obs.anchor = anchors_.positions.at(it->anchor);
    obs.antenna = antenna_offsets_.at(std::to_string(it->node) + "." + it->antenna);
    obs.dt = it->stamp - t_begin;
    obs.step = t_end - t_begin;
    obs.sigma = config_.uwb_sigma;
    if (obs.dt <= 0.0) continue;

    if (gate_enabled && initialized_) {
      const double residual = uwb_residual(*state_begin, predicted_end, obs);
      if (std::abs(residual) > config_.outlier_gate_sigma * config_.uwb_sigma) {
        if (result) ++result->uwb_dropped;
        continue;
      }
    }
    interval.uwb.push_back(obs);
    if (result) ++result->uwb_kept;
  }
  return interval;
}

Vec3 Pipeline::trilaterate_seed() const {
  // Median measured range per anchor, body offsets ignored.
  std::map<int, std::vector<double>> per_anchor;
  for (const auto& rec : uwb_buffer_) per_anchor[rec.anchor].push_back(rec.range);

  std::vector<std::pair<Vec3, double>> spheres;
  Vec3 centroid = Vec3::Zero();
  for (auto& [anchor, ranges] : per_anchor) {
    std::sort(ranges.begin(), ranges.end());
    spheres.push_back({anchors_.positions.at(anchor), ranges[ranges.size() / 2]});
    centroid += anchors_.positions.at(anchor);
  }
  if (spheres.empty()) return Vec3::Zero();
  centroid /= static_cast<double>(spheres.size());

  // Damped Gauss-Newton on the sphere residuals; start below the anchor
  // plane where the vehicle sits before takeoff.
  Vec3 p = centroid + Vec3(0.05, 0.05, -1.0);
  for (int iter = 0; iter < 20; ++iter) {
    Mat3 h = 1e-9 * Mat3::Identity();
    Vec3 g = Vec3::Zero();
    for (const auto& [x, d] : spheres) {
      const Vec3 delta = p - x;
      const double norm = delta.norm();
      if (norm < 1e-6) continue;
      const Vec3 jac = delta / norm;
      h += jac * jac.transpose();
      g += jac * (norm - d);
    }
    const Vec3 step = h.ldlt().solve(-g);
    p += step;
    if (step.norm() < 1e-10) break;
  }
  return p;
}

bool Pipeline::try_initialize() {
  if (static_cast<int>(uwb_buffer_.size()) < config_.init_min_ranges) return false;
  // A failed attempt (e.g. outlier-dominated startup) is only retried once
  // meaningfully more data has arrived.
  if (init_attempt_count_ >= 0 &&
      static_cast<int>(uwb_buffer_.size()) < init_attempt_count_ + 50) {
    return false;
  }
  if (imu_buffer_.size() < 2) return false;
  const double t0 = imu_buffer_.front().stamp;
  const double span = imu_buffer_.back().stamp - t0;
  if (span < config_.init_min_imu_span) return false;

  const double dt = config_.step_length;
  const int n_steps = static_cast<int>(std::floor(span / dt));
  if (n_steps < 1) return false;
  int covered = 0;
  for (const auto& rec : uwb_buffer_) {
    if (rec.stamp > t0 && rec.stamp <= t0 + n_steps * dt) ++covered;
  }
  // The buffer tail past the last full step boundary waits for the first
  // runtime step, so allow a small shortfall inside the window itself.
  if (covered < config_.init_min_ranges - 10) return false;

  // Roll/pitch from the mean specific force, yaw left to the grid.
  Vec3 accel_mean = Vec3::Zero();
  for (const auto& s : imu_buffer_) accel_mean += s.accel;
  accel_mean /= static_cast<double>(imu_buffer_.size());
  const Vec3 au = accel_mean.normalized();
  const Vec3 zu(0, 0, 1);
  Quat q_seed = Quat::Identity();
  const Vec3 axis = au.cross(zu);
  if (axis.norm() > 1e-9) {
    q_seed = vec_to_quat(axis.normalized() *
                         std::acos(std::clamp(au.dot(zu), -1.0, 1.0)));
  } else if (au.dot(zu) < 0.0) {
    q_seed = vec_to_quat(Vec3(M_PI, 0, 0));
  }

  NavState seed_state;
  seed_state.q = q_seed;
  seed_state.p = trilaterate_seed();

  SlidingWindow seed;
  seed.nodes.push_back({t0, seed_state});
  for (int k = 0; k < n_steps; ++k) {
    const double ta = t0 + k * dt;
    const double tb = ta + dt;
    StepResult unused;
    auto interval = create_step(ta, tb, /*gate_enabled=*/false, &unused);
    if (!interval) return false;
    seed.nodes.push_back({tb, seed_state});
    seed.intervals.push_back(std::move(*interval));
  }

  init_attempt_count_ = static_cast<int>(uwb_buffer_.size());

  InitializationResult init;
  try {
    init = yaw_grid_initialize(seed, config_.init_yaw_grid, config_.solver, fusion_,
                               covered);
  } catch (const std::exception&) {
    return false;
  }

  const auto problem =
      build_problem(init.window, fusion_, config_.solver, init.window.nodes[0].state);
  const double per_residual = init.report.final_cost / problem.residual_dim;
  if (!(per_residual < config_.init_cost_threshold)) return false;

  window_ = std::move(init.window);
  while (window_.state_count() > config_.solver.window_size + 1) {
    window_.nodes.erase(window_.nodes.begin());
    window_.intervals.erase(window_.intervals.begin());
  }
  init_yaw_seed_ = init.yaw_seed;
  initialized_ = true;
  next_step_stamp_ = window_.nodes.back().stamp + dt;
  emitted_until_ = window_.nodes.back().stamp;
  high_rate_.push_back({window_.nodes.back().stamp, window_.nodes.back().state});
  prune_buffers(window_.nodes.back().stamp);
  return true;
}

void Pipeline::prune_buffers(double before) {
  // Keep one sample at or before `before` for boundary interpolation.
  auto imu_cut = std::lower_bound(
      imu_buffer_.begin(), imu_buffer_.end(), before,
      [](const ImuSample& s, double v) { return s.stamp < v; });
  if (imu_cut != imu_buffer_.begin()) imu_buffer_.erase(imu_buffer_.begin(), imu_cut - 1);

  auto uwb_cut = std::lower_bound(
      uwb_buffer_.begin(), uwb_buffer_.end(), before,
      [](const UwbRangeRecord& r, double v) { return r.stamp < v; });
  uwb_buffer_.erase(uwb_buffer_.begin(), uwb_cut);

  for (auto& [name, stream] : osl_streams_) {
    auto cut = std::lower_bound(
        stream.buffer.begin(), stream.buffer.end(), before,
        [](const OslPoseRecord& r, double v) { return r.stamp < v; });
    if (cut != stream.buffer.begin()) stream.buffer.erase(stream.buffer.begin(), cut - 1);
  }
}

void Pipeline::emit_high_rate_up_to(double t_limit) {
  if (!initialized_) return;
  const double base_stamp = window_.nodes.back().stamp;
  const NavState& base = window_.nodes.back().state;
  for (const auto& sample : imu_buffer_) {
    if (sample.stamp <= emitted_until_ || sample.stamp > t_limit) continue;
    if (sample.stamp <= base_stamp) continue;
    const ImuSegment seg = extract_imu_segment(base_stamp, sample.stamp);
    high_rate_.push_back({sample.stamp, predict_state(base, seg, fusion_.gravity)});
    emitted_until_ = sample.stamp;
  }
}

std::vector<StepResult> Pipeline::process(double now) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<StepResult> results;

  if (!initialized_) {
    if (!try_initialize()) return results;
  }

  const double dt = config_.step_length;
  while (true) {
    const double t_end = next_step_stamp_;
    if (t_end > now + 1e-9) break;
    if (imu_buffer_.empty() || imu_buffer_.back().stamp < t_end) break;

    const double coverage = std::min(now, imu_buffer_.back().stamp);
    const int remaining_due = static_cast<int>(std::floor((coverage - t_end) / dt)) + 1;
    const bool skip = remaining_due > config_.skip_backlog_threshold;

    StepResult result;
    result.stamp = t_end;
    const double t_begin = window_.nodes.back().stamp;
    auto interval = create_step(t_begin, t_end, /*gate_enabled=*/true, &result);
    if (!interval) break;

    // Real-time outputs for stamps before this step use the previous state.
    emit_high_rate_up_to(t_end - 1e-12);

    window_.slide(t_end, std::move(*interval), fusion_.gravity,
                  config_.solver.window_size + 1);
    if (!skip) {
      result.report = solve(window_, config_.solver, fusion_);
      result.solved = true;
      if (config_.nudge_enabled && !config_.nudge_angles.empty()) {
        result.report =
            yaw_nudge_explore(window_, config_.nudge_angles, config_.solver, fusion_);
      }
    }

    high_rate_.push_back({t_end, window_.nodes.back().state});
    emitted_until_ = t_end;
    next_step_stamp_ = t_end + dt;
    prune_buffers(window_.nodes.front().stamp);
    results.push_back(result);
  }

  if (!imu_buffer_.empty()) {
    emit_high_rate_up_to(std::min(now, imu_buffer_.back().stamp));
  }
  return results;
}

std::vector<StepResult> replay_dataset(Pipeline* pipeline, const Dataset& data) {
  struct Event {
    double stamp;
    int kind;  // 0 imu, 1 uwb, 2 osl
    size_t index;
    const std::string* stream;
  };
  std::vector<Event> events;
  events.reserve(data.imu.size() + data.uwb.size());
  for (size_t i = 0; i < data.imu.size(); ++i) {
    events.push_back({data.imu[i].stamp, 0, i, nullptr});
  }
  for (size_t i = 0; i < data.uwb.size(); ++i) {
    events.push_back({data.uwb[i].stamp, 1, i, nullptr});
  }
  for (const auto& [name, stream] : data.osl) {
    for (size_t i = 0; i < stream.size(); ++i) {
      events.push_back({stream[i].stamp, 2, i, &name});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.stamp < b.stamp; });

  std::vector<StepResult> results;
  for (const auto& event : events) {
    switch (event.kind) {
      case 0: {
        pipeline->admit_imu(data.imu[event.index]);
        auto step_results = pipeline->process(event.stamp);
        results.insert(results.end(), step_results.begin(), step_results.end());
        break;
      }
      case 1:
        pipeline->admit_uwb(data.uwb[event.index]);
        break;
      case 2:
        pipeline->admit_osl(*event.stream, data.osl.at(*event.stream)[event.index]);
        break;
    }
  }
  return results;
}

}  // namespace rio
