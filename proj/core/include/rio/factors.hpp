#pragma once

#include <optional>
#include <tuple>
#include <vector>

#include "rio/nav_state.hpp"
#include "rio/observations.hpp"
#include "rio/preintegration.hpp"
#include "rio/types.hpp"

// Residuals and analytic Jacobians for the three factor families. All
// Jacobians are taken w.r.t. the retraction perturbation of each sub-state
// (q o E(theta) for attitudes, additive for vectors) and are verified against
// central finite differences in the test suite.

namespace rio {

// ---------------------------------------------------------------------------
// OSL pose-displacement factor
// ---------------------------------------------------------------------------

/// r = (2 vec(dq_meas^-1 o dq_est), dp_est - dp_meas) with
/// dq_est = qk^-1 o qk1 and dp_est = Rk^-1 (pk1 - pk).
Vec6 osl_residual(const NavState& xk, const NavState& xk1, const OslDisplacement& obs);

struct OslJacobians {
  Mat3 rot_wrt_qk, rot_wrt_qk1;
  Mat3 trans_wrt_qk, trans_wrt_pk, trans_wrt_pk1;
};
OslJacobians osl_jacobians(const NavState& xk, const NavState& xk1,
                           const OslDisplacement& obs);

// ---------------------------------------------------------------------------
// IMU preintegration factor
// ---------------------------------------------------------------------------

/// r = (r_gamma, r_alpha, r_beta, r_bg, r_ba), 15-dim.
Vec15 imu_residual(const NavState& xk, const NavState& xk1, const Preintegration& pre,
                   const Vec3& gravity);

struct ImuJacobians {
  Mat3 gamma_wrt_qk, gamma_wrt_qk1, gamma_wrt_bgk;
  Mat3 alpha_wrt_qk, alpha_wrt_pk, alpha_wrt_pk1, alpha_wrt_vk, alpha_wrt_bgk,
      alpha_wrt_bak;
  Mat3 beta_wrt_qk, beta_wrt_vk, beta_wrt_vk1, beta_wrt_bgk, beta_wrt_bak;
  // Bias rows are constant -I / +I and are filled directly at assembly.
};
ImuJacobians imu_jacobians(const NavState& xk, const NavState& xk1,
                           const Preintegration& pre, const Vec3& gravity);

// ---------------------------------------------------------------------------
// UWB body-offset range factor
// ---------------------------------------------------------------------------

/// Interpolation coefficients (s, a, b): s = dt/step,
/// a = -(step^2 - dt^2)/(2 step), b = -(step - dt)^2/(2 step).
/// Throws std::invalid_argument when dt > step or step <= 0.
std::tuple<double, double, double> uwb_interp_coeffs(double dt, double step);

/// Antenna-to-anchor vector at the ranging instant:
/// n = pk1 + Rk Exp(s Log(Rk^-1 Rk1)) y + a vk1 + b vk - x.
Vec3 uwb_predicted_vector(const NavState& xk, const NavState& xk1,
                          const UwbObservation& obs);

/// r = ||n|| - range.
double uwb_residual(const NavState& xk, const NavState& xk1, const UwbObservation& obs);

struct UwbJacobians {
  RowVec3 wrt_pk1, wrt_vk, wrt_vk1, wrt_qk, wrt_qk1;
};
UwbJacobians uwb_jacobians(const NavState& xk, const NavState& xk1,
                           const UwbObservation& obs);

/// Range direction undefined below this distance; the factor is disabled.
inline constexpr double kDegenerateRange = 1e-6;

// ---------------------------------------------------------------------------
// Assembled residual blocks
// ---------------------------------------------------------------------------

struct JacobianEntry {
  int state;    // window node index
  Block block;  // sub-state tag
  MatX jac;     // residual_dim x 3
};

/// One whitened least-squares term: cost contribution is
/// || sqrt_info * residual ||^2 with sqrt_info = chol(P^-1).
struct ResidualBlock {
  enum class Family { kImu, kOsl, kUwb, kPrior };
  Family family;
  VecX residual;
  MatX sqrt_info;
  std::vector<JacobianEntry> jacobians;
};

ResidualBlock make_osl_block(int k, const NavState& xk, const NavState& xk1,
                             const OslDisplacement& obs);
ResidualBlock make_imu_block(int k, const NavState& xk, const NavState& xk1,
                             const Preintegration& pre, const Vec3& gravity);
/// nullopt when the predicted antenna-anchor distance is degenerate.
std::optional<ResidualBlock> make_uwb_block(int k, const NavState& xk,
                                            const NavState& xk1,
                                            const UwbObservation& obs);
/// Weak attitude+position prior anchoring state k to `anchor` (gauge fix for
/// windows that transiently carry no absolute range information).
ResidualBlock make_prior_block(int k, const NavState& current, const NavState& anchor,
                               double sigma_theta, double sigma_p);

}  // namespace rio
