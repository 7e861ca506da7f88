#include "rio/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "rio/manifold.hpp"

namespace rio {

namespace {

std::vector<NavState> window_states(const SlidingWindow& w) {
  std::vector<NavState> s;
  s.reserve(w.nodes.size());
  for (const auto& n : w.nodes) s.push_back(n.state);
  return s;
}

AssembledProblem build_with_states(const SlidingWindow& window,
                                   const std::vector<NavState>& states,
                                   const FusionParams& params, const SolverConfig& config,
                                   const std::optional<NavState>& gauge_anchor) {
  AssembledProblem problem;
  const bool no_uwb = window.uwb_count() == 0;

  for (size_t i = 0; i < window.intervals.size(); ++i) {
    const auto& interval = window.intervals[i];
    const NavState& xk = states[i];
    const NavState& xk1 = states[i + 1];
    const int k = static_cast<int>(i);

    if (interval.preint.sample_count > 0) {
      problem.blocks.push_back(
          make_imu_block(k, xk, xk1, interval.preint, params.gravity));
    }
    for (const auto& osl : interval.osl) {
      problem.blocks.push_back(make_osl_block(k, xk, xk1, osl));
    }
    for (const auto& uwb : interval.uwb) {
      if (auto block = make_uwb_block(k, xk, xk1, uwb)) {
        problem.blocks.push_back(std::move(*block));
      }
    }
  }

  if (no_uwb && gauge_anchor.has_value()) {
    problem.blocks.push_back(make_prior_block(0, states[0], *gauge_anchor,
                                              config.gauge_sigma_theta,
                                              config.gauge_sigma_p));
    problem.gauge_prior_active = true;
  }

  if (problem.blocks.empty()) {
    throw std::invalid_argument("build_problem: window carries no factors");
  }
  for (const auto& b : problem.blocks) {
    problem.residual_dim += static_cast<int>(b.residual.size());
  }
  return problem;
}

void accumulate_family_costs(const AssembledProblem& problem, SolveReport* report) {
  report->cost_imu = report->cost_osl = report->cost_uwb = report->cost_prior = 0.0;
  for (const auto& b : problem.blocks) {
    const double c = (b.sqrt_info * b.residual).squaredNorm();
    switch (b.family) {
      case ResidualBlock::Family::kImu: report->cost_imu += c; break;
      case ResidualBlock::Family::kOsl: report->cost_osl += c; break;
      case ResidualBlock::Family::kUwb: report->cost_uwb += c; break;
      case ResidualBlock::Family::kPrior: report->cost_prior += c; break;
    }
  }
}

void reintegrate_if_needed(SlidingWindow& window, const SolverConfig& config) {
  for (size_t i = 0; i < window.intervals.size(); ++i) {
    auto& interval = window.intervals[i];
    if (interval.preint.sample_count == 0) continue;
    const ImuBias nb{window.nodes[i].state.bg, window.nodes[i].state.ba};
    if (interval.preint.needs_reintegration(nb, config.reintegrate_gyro_threshold,
                                            config.reintegrate_accel_threshold)) {
      interval.preint = preintegrate(interval.imu, nb, interval.preint.noise);
    }
  }
}

}  // namespace

int SlidingWindow::uwb_count() const {
  int n = 0;
  for (const auto& interval : intervals) n += static_cast<int>(interval.uwb.size());
  return n;
}

void SlidingWindow::validate() const {
  if (nodes.size() < 2 || intervals.size() != nodes.size() - 1) {
    throw std::invalid_argument("SlidingWindow: need n nodes and n-1 intervals, n >= 2");
  }
  for (size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].stamp <= nodes[i - 1].stamp) {
      throw std::invalid_argument("SlidingWindow: stamps must be strictly increasing");
    }
  }
}

void SlidingWindow::slide(double new_stamp, WindowInterval interval, const Vec3& gravity,
                          int max_states) {
  const NavState init = nodes.empty()
                            ? NavState{}
                            : predict_state(nodes.back().state, interval.imu, gravity);
  nodes.push_back({new_stamp, init});
  intervals.push_back(std::move(interval));
  while (static_cast<int>(nodes.size()) > max_states) {
    nodes.erase(nodes.begin());
    intervals.erase(intervals.begin());
  }
}

AssembledProblem build_problem(const SlidingWindow& window, const FusionParams& params,
                               const SolverConfig& config,
                               const std::optional<NavState>& gauge_anchor) {
  return build_with_states(window, window_states(window), params, config, gauge_anchor);
}

double problem_cost(const AssembledProblem& problem) {
  double cost = 0.0;
  for (const auto& b : problem.blocks) cost += (b.sqrt_info * b.residual).squaredNorm();
  return cost;
}

void linearize(const AssembledProblem& problem, int n_states, MatX* jacobian,
               VecX* residual) {
  const int n = n_states * kStateDof;
  jacobian->setZero(problem.residual_dim, n);
  residual->setZero(problem.residual_dim);

  int row = 0;
  for (const auto& b : problem.blocks) {
    const int dim = static_cast<int>(b.residual.size());
    residual->segment(row, dim) = b.sqrt_info * b.residual;
    for (const auto& entry : b.jacobians) {
      const int col = entry.state * kStateDof + block_offset(entry.block);
      jacobian->block(row, col, dim, 3) += b.sqrt_info * entry.jac;
    }
    row += dim;
  }
}

SolveReport solve(SlidingWindow& window, const SolverConfig& config,
                  const FusionParams& params) {
  window.validate();
  reintegrate_if_needed(window, config);

  // The gauge target is the oldest state as it entered this solve.
  const std::optional<NavState> gauge_anchor = window.nodes[0].state;

  std::vector<NavState> states = window_states(window);
  AssembledProblem problem =
      build_with_states(window, states, params, config, gauge_anchor);

  SolveReport report;
  report.gauge_prior_active = problem.gauge_prior_active;
  double cost = problem_cost(problem);
  report.initial_cost = cost;

  const int n_states = window.state_count();
  double lambda = config.lm_lambda_init;
  MatX jac;
  VecX res;

  while (report.iterations < config.max_iterations && !report.converged) {
    linearize(problem, n_states, &jac, &res);
    const VecX gradient = jac.transpose() * res;
    if (gradient.lpNorm<Eigen::Infinity>() < config.gradient_tol) {
      report.converged = true;
      break;
    }
    const MatX hessian = jac.transpose() * jac;

    bool accepted = false;
    while (!accepted) {
      MatX damped = hessian;
      for (int d = 0; d < damped.rows(); ++d) {
        damped(d, d) += lambda * std::max(hessian(d, d), 1e-12);
      }
      Eigen::LDLT<MatX> ldlt(damped);
      VecX delta;
      bool usable = ldlt.info() == Eigen::Success;
      if (usable) {
        delta = ldlt.solve(-gradient);
        usable = delta.allFinite();
      }

      if (usable) {
        std::vector<NavState> candidate(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
          candidate[i] = retract(states[i], delta.segment<kStateDof>(i * kStateDof),
                                 config.approximate_retraction);
        }
        AssembledProblem cand_problem =
            build_with_states(window, candidate, params, config, gauge_anchor);
        const double cand_cost = problem_cost(cand_problem);

        if (std::isfinite(cand_cost) && cand_cost < cost) {
          ++report.iterations;
          const double drop = cost - cand_cost;
          states = std::move(candidate);
          problem = std::move(cand_problem);
          lambda = std::max(lambda / config.lm_lambda_down, 1e-12);
          if (drop < config.cost_tol * std::max(1.0, cost) ||
              delta.norm() < config.step_tol) {
            report.converged = true;
          }
          cost = cand_cost;
          accepted = true;
        }
      }
      if (!accepted) {
        lambda *= config.lm_lambda_up;
        if (lambda > 1e14) {
          // No descent direction left at any damping: local optimum.
          report.converged = true;
          break;
        }
      }
    }
  }

  for (size_t i = 0; i < states.size(); ++i) window.nodes[i].state = states[i];
  report.final_cost = cost;
  accumulate_family_costs(problem, &report);
  return report;
}

SlidingWindow yaw_rotated(const SlidingWindow& window, double yaw_offset) {
  SlidingWindow out = window;
  const Quat rot = vec_to_quat(Vec3(0.0, 0.0, yaw_offset));
  for (auto& node : out.nodes) {
    node.state.q = Quat(rot * node.state.q).normalized();
  }
  return out;
}

InitializationResult yaw_grid_initialize(const SlidingWindow& seed_window, int n_grid,
                                         const SolverConfig& config,
                                         const FusionParams& params, int min_uwb_count) {
  if (n_grid < 1) throw std::invalid_argument("yaw_grid_initialize: n_grid < 1");
  if (seed_window.uwb_count() < min_uwb_count) {
    throw std::invalid_argument(
        "yaw_grid_initialize: not enough UWB observations buffered");
  }

  std::optional<InitializationResult> best;
  for (int g = 0; g < n_grid; ++g) {
    const double yaw = 2.0 * M_PI * g / n_grid;
    SlidingWindow candidate = yaw_rotated(seed_window, yaw);
    SolveReport rep;
    try {
      rep = solve(candidate, config, params);
    } catch (const std::exception&) {
      continue;
    }
    if (!std::isfinite(rep.final_cost)) continue;
    if (!best.has_value() || rep.final_cost < best->report.final_cost) {
      best = InitializationResult{std::move(candidate), rep, yaw};
    }
  }
  if (!best.has_value()) {
    throw std::runtime_error("yaw_grid_initialize: every yaw seed diverged");
  }
  return std::move(*best);
}

SolveReport yaw_nudge_explore(SlidingWindow& window, const std::vector<double>& nudges,
                              const SolverConfig& config, const FusionParams& params) {
  SolveReport best_report;
  {
    const auto problem = build_problem(window, params, config, window.nodes[0].state);
    best_report.initial_cost = best_report.final_cost = problem_cost(problem);
    best_report.converged = true;
    best_report.gauge_prior_active = problem.gauge_prior_active;
    accumulate_family_costs(problem, &best_report);
  }

  for (double nudge : nudges) {
    SlidingWindow candidate = yaw_rotated(window, nudge);
    SolveReport rep;
    try {
      rep = solve(candidate, config, params);
    } catch (const std::exception&) {
      continue;
    }
    if (std::isfinite(rep.final_cost) && rep.final_cost < best_report.final_cost) {
      window = std::move(candidate);
      rep.initial_cost = best_report.initial_cost;
      best_report = rep;
    }
  }
  return best_report;
}

}  // namespace rio
