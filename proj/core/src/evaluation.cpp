#include "rio/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "rio/manifold.hpp"

namespace rio {

namespace {

// Index pairs (est, gt) matched by nearest stamp within tolerance.
std::vector<std::pair<size_t, size_t>> match_stamps(const TrajectoryData& est,
                                                    const TrajectoryData& gt,
                                                    double tolerance) {
  std::vector<std::pair<size_t, size_t>> pairs;
  size_t j = 0;
  for (size_t i = 0; i < est.points.size(); ++i) {
    const double t = est.points[i].stamp;
    while (j + 1 < gt.points.size() &&
           std::abs(gt.points[j + 1].stamp - t) <= std::abs(gt.points[j].stamp - t)) {
      ++j;
    }
    if (!gt.points.empty() && std::abs(gt.points[j].stamp - t) <= tolerance) {
      pairs.push_back({i, j});
    }
  }
  return pairs;
}

double wrap_deg(double deg) {
  while (deg > 180.0) deg -= 360.0;
  while (deg <= -180.0) deg += 360.0;
  return deg;
}

}  // namespace

Vec3 to_rpy(const Quat& q) {
  const Mat3 r = quat_to_rot(q);
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  return {std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0))};
}

void align_to_initial_pose(TrajectoryData* traj, const Quat& q0, const Vec3& p0) {
  const Mat3 r0 = quat_to_rot(q0);
  for (auto& point : traj->points) {
    point.p = r0 * point.p + p0;
    point.q = Quat(q0 * point.q).normalized();
    point.v = r0 * point.v;
  }
}

void align_yaw_translation(TrajectoryData* est, const TrajectoryData& gt,
                           double match_tolerance) {
  const auto pairs = match_stamps(*est, gt, match_tolerance);
  if (pairs.size() < 2) {
    throw std::runtime_error("align_yaw_translation: not enough matched stamps");
  }

  Vec3 mean_est = Vec3::Zero(), mean_gt = Vec3::Zero();
  for (const auto& [i, j] : pairs) {
    mean_est += est->points[i].p;
    mean_gt += gt.points[j].p;
  }
  mean_est /= static_cast<double>(pairs.size());
  mean_gt /= static_cast<double>(pairs.size());

  // Planar Procrustes restricted to a z rotation.
  double sin_acc = 0.0, cos_acc = 0.0;
  for (const auto& [i, j] : pairs) {
    const Vec3 a = est->points[i].p - mean_est;
    const Vec3 b = gt.points[j].p - mean_gt;
    cos_acc += a.x() * b.x() + a.y() * b.y();
    sin_acc += a.x() * b.y() - a.y() * b.x();
  }
  const double yaw = std::atan2(sin_acc, cos_acc);
  const Quat rot = vec_to_quat(Vec3(0, 0, yaw));
  const Mat3 r = quat_to_rot(rot);
  const Vec3 t = mean_gt - r * mean_est;

  for (auto& point : est->points) {
    point.p = r * point.p + t;
    point.q = Quat(rot * point.q).normalized();
    point.v = r * point.v;
  }
}

EvalReport evaluate_trajectory(const TrajectoryData& est, const TrajectoryData& gt,
                               double match_tolerance, std::vector<ErrorSample>* series) {
  const auto pairs = match_stamps(est, gt, match_tolerance);
  if (pairs.size() < 10) {
    throw std::runtime_error("evaluate_trajectory: fewer than 10 matched stamp pairs");
  }

  double pos_sq = 0.0, rot_sq = 0.0, vel_sq = 0.0;
  if (series) series->clear();
  for (const auto& [i, j] : pairs) {
    const auto& e = est.points[i];
    const auto& g = gt.points[j];
    pos_sq += (e.p - g.p).squaredNorm();
    const Vec3 rot_err = log_so3(quat_to_rot(g.q).transpose() * quat_to_rot(e.q));
    rot_sq += rot_err.squaredNorm();
    vel_sq += (e.v - g.v).squaredNorm();

    if (series) {
      ErrorSample sample;
      sample.stamp = e.stamp;
      sample.pos_err = e.p - g.p;
      const Vec3 rpy_e = to_rpy(e.q) * 180.0 / M_PI;
      const Vec3 rpy_g = to_rpy(g.q) * 180.0 / M_PI;
      for (int axis = 0; axis < 3; ++axis) {
        sample.rpy_err_deg[axis] = wrap_deg(rpy_e[axis] - rpy_g[axis]);
      }
      series->push_back(sample);
    }
  }

  const double n = static_cast<double>(pairs.size());
  EvalReport report;
  report.matched_pairs = static_cast<int>(pairs.size());
  report.rmse_pos_m = std::sqrt(pos_sq / n);
  report.rmse_rot_deg = std::sqrt(rot_sq / n) * 180.0 / M_PI;
  report.rmse_vel_mps =
      (est.has_velocity && gt.has_velocity) ? std::sqrt(vel_sq / n) : -1.0;
  report.duration_s =
      est.points[pairs.back().first].stamp - est.points[pairs.front().first].stamp;
  return report;
}

}  // namespace rio
