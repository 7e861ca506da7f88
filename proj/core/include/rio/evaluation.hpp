#pragma once

#include <vector>

#include "rio/dataset_io.hpp"
#include "rio/types.hpp"

namespace rio {

/// Maps a local-frame odometry trajectory into the world frame using the
/// initial ground-truth pose: p -> R(q0) p + p0, q -> q0 o q.
void align_to_initial_pose(TrajectoryData* traj, const Quat& q0, const Vec3& p0);

/// Closed-form yaw + translation least-squares fit of est onto gt (positions
/// matched by nearest stamp); applies the transform to est in place.
void align_yaw_translation(TrajectoryData* est, const TrajectoryData& gt,
                           double match_tolerance = 0.01);

struct EvalReport {
  double rmse_pos_m = 0.0;
  double rmse_rot_deg = 0.0;
  double rmse_vel_mps = -1.0;  // negative when either trajectory lacks velocity
  int matched_pairs = 0;
  double duration_s = 0.0;
};

/// Per-pair error sample for plot output.
struct ErrorSample {
  double stamp = 0.0;
  Vec3 pos_err = Vec3::Zero();      // est - gt, world frame
  Vec3 rpy_err_deg = Vec3::Zero();  // roll, pitch, yaw differences
};

/// Nearest-neighbor stamp matching within match_tolerance seconds; throws
/// std::runtime_error when fewer than 10 pairs match.
EvalReport evaluate_trajectory(const TrajectoryData& est, const TrajectoryData& gt,
                               double match_tolerance = 0.01,
                               std::vector<ErrorSample>* series = nullptr);

/// Roll/pitch/yaw (ZYX) of a rotation, radians.
Vec3 to_rpy(const Quat& q);

}  // namespace rio
