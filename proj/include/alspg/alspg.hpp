#pragma once

#include <memory>
#include <string>
#include <vector>

#include "alspg/sets.hpp"
#include "alspg/spg.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// One constraint g(x) in C with its multiplier and penalty state. The
/// Jacobian enters only through transpose products r -> grad g(x)^T r, so
/// constraints over trajectories stay matrix-free.
struct ConstraintBlock {
  using MapFn = std::function<Vector(const Vector&)>;
  using JvpFn = std::function<Vector(const Vector&, const Vector&)>;

  std::string name;
  MapFn g;
  JvpFn jvp_t;  // (x, r) -> grad g(x)^T r
  std::shared_ptr<const ProjectableSet> set;
  Vector lambda;     // empty means zeros, sized on first use
  double rho = 0.0;  // nonpositive means "use the solver default"

  Vector eval_g(const Vector& x) const {
    ++n_g_calls;
    return g(x);
  }
  Vector eval_jvp_t(const Vector& x, const Vector& r) const {
    ++n_jvp_calls;
    return jvp_t(x, r);
  }

  mutable long n_g_calls = 0;
  mutable long n_jvp_calls = 0;
};

/// Augmented Lagrangian value
///   f(x) + sum_i rho_i/2 * || z_i - proj_{C_i}(z_i) ||^2,  z_i = g_i(x) + lambda_i/rho_i.
double al_value(const Vector& x, const std::vector<ConstraintBlock>& blocks,
                const ObjectiveOracle& f);

/// Gradient of al_value. The distance-to-set term differentiates to
/// grad g(x)^T (z - proj(z)) without any projection derivative, so each block
/// contributes rho_i * jvp_t(x, z_i - proj(z_i)).
Vector al_gradient(const Vector& x, const std::vector<ConstraintBlock>& blocks,
                   const ObjectiveOracle& f);

/// Feasibility measure V = || g(x) - proj_C(g(x) + lambda/rho) ||.
double constraint_auxiliary(const Vector& gx, const ConstraintBlock& block);

struct AlspgConfig {
  double rho0 = 0.1;
  double outer_tol = 1e-4;      // epsilon_2 on max-block V
  double penalty_growth = 10.0;
  // A block's penalty grows unless its V drops to sufficient_decrease times
  // the previous value; 1.0 keeps the penalty whenever V merely does not
  // increase.
  double sufficient_decrease = 0.5;
  int max_outer = 50;
  SpgConfig inner{};
  // Loose-to-tight inner tolerance schedule tied to the running constraint
  // violation: each subproblem is solved to
  // clamp(inner_tol_fraction * max_V, inner.tol, inner_tol_start),
  // monotonically tightened, and termination requires the final subproblem to
  // have run at inner.tol. Disable to run every subproblem at inner.tol.
  bool inner_tol_schedule = true;
  double inner_tol_start = 1e-3;
  double inner_tol_fraction = 0.1;
  double lambda_clip = 1e8;
};

enum class AlspgStatus { converged, max_outer, inner_failed };

const char* to_string(AlspgStatus s);

struct AlspgBlockState {
  std::string name;
  Vector lambda;
  double rho = 0.0;
  double V = 0.0;
};

struct AlspgOuterRow {
  int outer = 0;
  double max_V = 0.0;
  std::vector<double> block_V;
  std::vector<double> block_rho;
  std::vector<double> block_lambda_norm;
  int inner_iterations = 0;
  SpgStatus inner_status = SpgStatus::max_iter;
  long n_value = 0;  // cumulative tallies after this outer iteration
  long n_gradient = 0;
  long n_jvp = 0;
};

struct AlspgResult {
  Vector x_star;
  double f_star = 0.0;  // objective f, not the augmented value
  AlspgStatus status = AlspgStatus::max_outer;
  int outer_iterations = 0;
  int total_inner_iterations = 0;
  double max_V = 0.0;
  std::vector<AlspgBlockState> blocks;
  std::vector<AlspgOuterRow> outer_trace;
  std::vector<SpgHistoryRow> inner_history;  // concatenated across subproblems
  long n_value_calls = 0;
  long n_gradient_calls = 0;
  long n_jvp_calls = 0;
  double final_gamma = 1.0;
  SpgStatus last_inner_status = SpgStatus::max_iter;
};

/// Augmented Lagrangian outer loop over projection constraints with the
/// spectral projected gradient solver on each subproblem. Multipliers update
/// as lambda <- rho * (z - proj(z)); a block's penalty grows only when its V
/// did not decrease. Subproblems warm-start from the previous solution and
/// stepsize. Terminates when max-block V(x, lambda_new, rho_old) < outer_tol.
AlspgResult alspg_solve(const ObjectiveOracle& f, const ProjectableSet& domain,
                        std::vector<ConstraintBlock> blocks, const Vector& x0,
                        const AlspgConfig& cfg);

/// Writes the outer trace as CSV with columns
/// outer,max_V,inner_iters,inner_status,n_f,n_grad,n_jvp,V_i...,rho_i...,lambda_norm_i...
void write_outer_trace_csv(const std::vector<AlspgOuterRow>& trace, const std::string& path);

}  // namespace alspg
