#pragma once

#include "alspg/ocp.hpp"
#include "alspg/spg.hpp"

namespace alspg {

struct IlqrConfig {
  int max_iter = 200;
  double tol = 1e-6;  // convergence on the inf-norm of the feedforward terms
  double reg_init = 1e-6;
  double reg_growth = 10.0;
  double reg_max = 1e2;
  int max_backtracks = 16;
  double armijo = 1e-4;
};

/// Iterative LQR baseline for unconstrained shooting problems: Riccati
/// backward pass on the linearized dynamics with the quadratized cost, then a
/// line-searched policy rollout. Counters match the projected-gradient
/// solvers: every trial rollout is a function evaluation and every
/// linearize-plus-backward sweep is a Jacobian evaluation. Throws if the
/// problem carries state constraints or a control domain.
SpgResult ilqr_baseline(const ShootingProblem& prob, const Vector& u0, const IlqrConfig& cfg = {});

inline SpgResult ilqr_baseline(const ShootingProblem& prob, const Vector& u0, int max_iter) {
  IlqrConfig cfg;
  cfg.max_iter = max_iter;
  return ilqr_baseline(prob, u0, cfg);
}

}  // namespace alspg
