#pragma once

#include <functional>

#include "rio/nav_state.hpp"
#include "rio/types.hpp"

namespace rio::testing {

/// Central finite differences of a two-state residual under retraction-based
/// perturbation of one sub-block of one state. Returns residual_dim x 3.
inline MatX fd_jacobian(const std::function<VecX(const NavState&, const NavState&)>& res,
                        const NavState& xk, const NavState& xk1, int state, Block block,
                        double h = 1e-6) {
  const VecX r0 = res(xk, xk1);
  MatX jac(r0.size(), 3);
  for (int c = 0; c < 3; ++c) {
    Vec15 delta = Vec15::Zero();
    delta[block_offset(block) + c] = h;
    const NavState xp_k = state == 0 ? retract(xk, delta) : xk;
    const NavState xp_k1 = state == 1 ? retract(xk1, delta) : xk1;
    delta[block_offset(block) + c] = -h;
    const NavState xm_k = state == 0 ? retract(xk, delta) : xk;
    const NavState xm_k1 = state == 1 ? retract(xk1, delta) : xk1;
    jac.col(c) = (res(xp_k, xp_k1) - res(xm_k, xm_k1)) / (2.0 * h);
  }
  return jac;
}

/// Relative Frobenius error with a floor that still flags a nonzero analytic
/// block against a structurally-zero numeric one.
inline double rel_error(const MatX& analytic, const MatX& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-3);
}

}  // namespace rio::testing
