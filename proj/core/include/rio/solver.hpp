#pragma once

#include <optional>
#include <vector>

#include "rio/factors.hpp"
#include "rio/nav_state.hpp"
#include "rio/observations.hpp"
#include "rio/preintegration.hpp"
#include "rio/types.hpp"

// Manifold-aware dense Levenberg-Marquardt over the sliding window. The
// tangent space stacks 15 dims per state in window order, each laid out as
// (theta, p, v, bg, ba). At the default window size the normal equations are
// at most 165x165, so a dense Cholesky is used throughout.
//
// Residual/Jacobian evaluation is pure; linearize/solve/retract run as a
// single-threaded critical section per iteration. A window has one owner.

namespace rio {

struct SolverConfig {
  int max_iterations = 50;
  double gradient_tol = 1e-10;  // on the infinity norm of J^T r
  double step_tol = 1e-12;
  double cost_tol = 1e-6;  // relative cost decrease
  double lm_lambda_init = 1e-4;
  double lm_lambda_up = 10.0;
  double lm_lambda_down = 10.0;
  int window_size = 10;  // M; the window holds M+1 states
  bool approximate_retraction = false;
  // Weak prior that keeps IMU+OSL-only windows full rank.
  double gauge_sigma_theta = 1.0;  // rad
  double gauge_sigma_p = 10.0;     // m
  // Bias-change thresholds beyond which first-order correction is replaced
  // by re-integration.
  double reintegrate_gyro_threshold = 1e-2;   // rad/s
  double reintegrate_accel_threshold = 1e-1;  // m/s^2
};

struct FusionParams {
  Vec3 gravity{0.0, 0.0, 9.81};
};

struct SolveReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool gauge_prior_active = false;
  // Per-family cost breakdown at the final estimate.
  double cost_imu = 0.0;
  double cost_osl = 0.0;
  double cost_uwb = 0.0;
  double cost_prior = 0.0;
};

struct WindowNode {
  double stamp = 0.0;
  NavState state;
};

/// Factors binding nodes[i] and nodes[i+1]. The raw IMU segment is kept so
/// the preintegration can be redone when the bias estimate moves too far
/// from its linearization point.
struct WindowInterval {
  ImuSegment imu;
  Preintegration preint;
  std::vector<OslDisplacement> osl;
  std::vector<UwbObservation> uwb;
};

class SlidingWindow {
 public:
  std::vector<WindowNode> nodes;
  std::vector<WindowInterval> intervals;

  int state_count() const { return static_cast<int>(nodes.size()); }
  int uwb_count() const;

  /// Throws std::invalid_argument when stamps are not strictly increasing or
  /// intervals do not pair consecutive nodes.
  void validate() const;

  /// Appends a node at new_stamp initialized by dead-reckoning the newest
  /// state through interval.imu; drops the oldest node and its factors once
  /// more than max_states states are present.
  void slide(double new_stamp, WindowInterval interval, const Vec3& gravity,
             int max_states);
};

struct AssembledProblem {
  std::vector<ResidualBlock> blocks;
  bool gauge_prior_active = false;
  int residual_dim = 0;
};

/// One ResidualBlock per observation, in deterministic order. When the
/// window carries no UWB observation and gauge_anchor is set, a weak prior
/// anchors state 0 to it. Throws std::invalid_argument on an empty factor
/// set.
AssembledProblem build_problem(const SlidingWindow& window, const FusionParams& params,
                               const SolverConfig& config,
                               const std::optional<NavState>& gauge_anchor = std::nullopt);

/// Sum of squared whitened residuals.
double problem_cost(const AssembledProblem& problem);

/// Stacks the whitened dense Jacobian and residual over the window tangent.
void linearize(const AssembledProblem& problem, int n_states, MatX* jacobian,
               VecX* residual);

/// Levenberg-Marquardt with multiplicative damping on diag(J^T J); accepted
/// steps are monotone non-increasing in cost. Re-integrates any interval
/// whose bias moved beyond the thresholds before linearizing.
SolveReport solve(SlidingWindow& window, const SolverConfig& config,
                  const FusionParams& params);

/// Copy of the window with every attitude pre-rotated by yaw_offset about
/// the world z axis.
SlidingWindow yaw_rotated(const SlidingWindow& window, double yaw_offset);

struct InitializationResult {
  SlidingWindow window;
  SolveReport report;
  double yaw_seed = 0.0;
};

/// Solves the window from n_grid yaw seeds covering [0, 2 pi) and returns the
/// smallest-cost result (ties break toward the smaller yaw). Requires at
/// least min_uwb_count buffered range observations; throws std::runtime_error
/// when every seed diverges.
InitializationResult yaw_grid_initialize(const SlidingWindow& seed_window, int n_grid,
                                         const SolverConfig& config,
                                         const FusionParams& params,
                                         int min_uwb_count = 100);

/// Re-solves from yaw-nudged copies of a converged window and keeps whichever
/// final cost is smallest; the resulting cost never exceeds the input cost.
SolveReport yaw_nudge_explore(SlidingWindow& window, const std::vector<double>& nudges,
                              const SolverConfig& config, const FusionParams& params);

}  // namespace rio
