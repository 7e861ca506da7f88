#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rio/anchors.hpp"
#include "rio/dataset_io.hpp"
#include "rio/observations.hpp"
#include "rio/sim.hpp"
#include "rio/solver.hpp"
#include "rio/types.hpp"

// Streaming front end: measurement admission with quality/rate/staleness
// checks, fixed-period step creation with boundary interpolation, the
// range outlier gate against IMU-predicted poses, yaw-grid initialization,
// backlog-aware optimization scheduling and the high-rate dead-reckoned
// output.
//
// admit_*() may be called concurrently with process(); a mutex serializes
// buffer access. Exactly one caller owns process() and the window.

namespace rio {

struct PipelineConfig {
  double step_length = 0.1;         // s
  double outlier_gate_sigma = 5.0;  // multiples of uwb_sigma
  double rate_of_change_max = 20.0; // m/s
  int skip_backlog_threshold = 2;   // pending steps beyond which solves are skipped
  double reorder_tolerance = 0.05;  // s, late-arrival allowance
  double osl_staleness_factor = 2.0;  // x nominal stream period

  double uwb_sigma = 0.05;  // m, measurement model
  Vec6 osl_sigma = (Vec6() << 0.02, 0.02, 0.02, 0.1, 0.1, 0.1).finished();

  int init_min_ranges = 100;
  double init_min_imu_span = 1.0;  // s
  int init_yaw_grid = 12;
  double init_cost_threshold = 9.0;  // final cost per residual dimension

  bool nudge_enabled = false;
  std::vector<double> nudge_angles;

  ImuNoiseParams imu_noise;  // estimator model, includes gravity
  SolverConfig solver;
};

enum class AdmitResult {
  kAccepted,
  kRejectedSnr,
  kRejectedEdge,
  kRejectedRate,
  kRejectedStale,
  kRejectedUnknown,  // antenna or anchor not in the rig
};

struct StampedState {
  double stamp = 0.0;
  NavState state;
};

struct StepResult {
  double stamp = 0.0;     // new node stamp
  bool solved = false;    // false when the backlog skip path was taken
  SolveReport report;     // valid when solved
  int uwb_kept = 0;
  int uwb_dropped = 0;    // by the outlier gate
  int osl_used = 0;       // streams contributing a factor
};

class Pipeline {
 public:
  Pipeline(PipelineConfig config, AnchorMap anchors,
           std::map<std::string, Vec3> antenna_offsets);

  AdmitResult admit_imu(const ImuSample& sample);
  AdmitResult admit_osl(const std::string& stream, const OslPoseRecord& pose);
  AdmitResult admit_uwb(const UwbRangeRecord& record);

  /// Creates and processes every step due by `now`: interpolated step
  /// extraction, outlier gating, solve (or backlog skip), slide, and
  /// high-rate output. Drives initialization until it succeeds.
  std::vector<StepResult> process(double now);

  bool initialized() const { return initialized_; }
  const SlidingWindow& window() const { return window_; }
  const std::vector<StampedState>& high_rate_output() const { return high_rate_; }

  int accepted_uwb_count() const { return static_cast<int>(uwb_buffer_.size()); }
  double initialization_yaw() const { return init_yaw_seed_; }

 private:
  struct OslStream {
    std::vector<OslPoseRecord> buffer;
    std::vector<double> gaps;  // recent inter-sample gaps for the period estimate
    double nominal_period = 0.0;
  };

  bool try_initialize();
  std::optional<WindowInterval> create_step(double t_begin, double t_end,
                                            bool gate_enabled, StepResult* result);
  ImuSegment extract_imu_segment(double t_begin, double t_end) const;
  std::optional<OslDisplacement> osl_displacement(OslStream& stream, double t_begin,
                                                  double t_end) const;
  void prune_buffers(double before);
  void emit_high_rate_up_to(double t_limit);
  Vec3 trilaterate_seed() const;

  PipelineConfig config_;
  AnchorMap anchors_;
  std::map<std::string, Vec3> antenna_offsets_;
  FusionParams fusion_;

  mutable std::mutex mutex_;
  std::vector<ImuSample> imu_buffer_;
  std::map<std::string, OslStream> osl_streams_;
  std::vector<UwbRangeRecord> uwb_buffer_;
  std::map<std::tuple<int, std::string, int>, std::pair<double, double>> last_range_;

  SlidingWindow window_;
  bool initialized_ = false;
  double next_step_stamp_ = 0.0;
  double init_yaw_seed_ = 0.0;
  int init_attempt_count_ = -1;

  std::vector<StampedState> high_rate_;
  double emitted_until_ = -1e18;
};

/// Replays a recorded dataset in stamp order (calling process() after each
/// IMU sample) and returns every step result.
std::vector<StepResult> replay_dataset(Pipeline* pipeline, const Dataset& data);

}  // namespace rio
