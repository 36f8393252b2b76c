#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "alspg/alspg.hpp"
#include "alspg/sets.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// Discrete-time dynamics x_{t+1} = step(x_t, u_t) with analytic
/// linearization A = d step/dx, B = d step/du.
struct DynamicsModel {
  std::string name;
  int state_dim = 0;
  int control_dim = 0;
  double dt = 0.0;
  std::function<Vector(const Vector&, const Vector&)> step;
  std::function<void(const Vector&, const Vector&, Matrix&, Matrix&)> linearize;
};

/// Thrown when a rollout produces a non-finite state; carries the offending
/// timestep.
class RolloutError : public std::runtime_error {
 public:
  RolloutError(int t, const std::string& what) : std::runtime_error(what), timestep(t) {}
  int timestep;
};

/// Stacked trajectories: controls u_0..u_{T-1}, states x_1..x_T (the initial
/// state is held separately).
inline Index traj_index(int t, int dim) { return static_cast<Index>(t) * dim; }

/// Forward rollout; returns states x_1..x_T stacked (T * state_dim entries).
Vector rollout(const DynamicsModel& dyn, const Vector& x0, const Vector& u);

/// Computes z = grad_u F(x0, u)^T y by one backward sweep over the
/// linearizations, where F is the rollout map and y is a stacked cotangent
/// for x_1..x_T. Stores only the running adjoint, never the T*n x T*m
/// sensitivity matrix.
Vector adjoint_vjp(const DynamicsModel& dyn, const Vector& x0, const Vector& u, const Vector& x,
                   const Vector& y);

/// Trajectory cost split into running stages t = 0..T-1 on (x_t, u_t) and a
/// terminal stage on x_T, with gradients and a quadratic (Gauss-Newton) view
/// used by the Riccati baseline.
class StageCost {
 public:
  virtual ~StageCost() = default;
  virtual double running(int t, const Vector& x_t, const Vector& u_t) const = 0;
  virtual void running_gradient(int t, const Vector& x_t, const Vector& u_t, Vector& gx,
                                Vector& gu) const = 0;
  virtual void running_quadratic(int t, const Vector& x_t, const Vector& u_t, Matrix& Qxx,
                                 Matrix& Ruu, Vector& qx, Vector& ru) const = 0;
  virtual double terminal(const Vector& x_T) const = 0;
  virtual void terminal_gradient(const Vector& x_T, Vector& gx) const = 0;
  virtual void terminal_quadratic(const Vector& x_T, Matrix& Qxx, Vector& qx) const = 0;
};

/// Total cost of a stacked trajectory pair and its gradients with respect to
/// the stacked states and controls.
double trajectory_cost(const StageCost& cost, const DynamicsModel& dyn, const Vector& x0,
                       const Vector& x, const Vector& u);
void trajectory_cost_gradients(const StageCost& cost, const DynamicsModel& dyn, const Vector& x0,
                               const Vector& x, const Vector& u, Vector& grad_x, Vector& grad_u);

/// State constraint applied along the trajectory: for each selected timestep
/// t, selector * x_t must lie in `set`. An empty timestep list means every
/// t = 1..T.
struct StateConstraint {
  std::string name;
  Matrix selector;  // k x state_dim
  std::shared_ptr<const ProjectableSet> set;  // acts on R^k
  std::vector<int> timesteps;                 // values in 1..T
};

/// Direct-shooting optimal control problem: dynamics, start state, horizon,
/// stage cost, control domain and state constraints. Eliminating the states
/// by rollout leaves a problem in the stacked controls only.
struct ShootingProblem {
  DynamicsModel dynamics;
  Vector x0;
  int horizon = 0;
  std::shared_ptr<const StageCost> cost;
  std::shared_ptr<const ProjectableSet> control_domain;  // on R^{T*n}; null = free
  std::vector<StateConstraint> state_constraints;

  Index control_size() const { return static_cast<Index>(horizon) * dynamics.control_dim; }
  Index state_size() const { return static_cast<Index>(horizon) * dynamics.state_dim; }
};

/// Single-entry rollout cache shared between the reduced objective and the
/// state-constraint blocks, so value/gradient/constraint evaluations at the
/// same control vector reuse one forward pass.
struct RolloutCache {
  Vector u;
  Vector x;
  bool valid = false;

  const Vector& states(const DynamicsModel& dyn, const Vector& x0, const Vector& u_query) {
    if (!valid || u.size() != u_query.size() || u != u_query) {
      x = rollout(dyn, x0, u_query);
      u = u_query;
      valid = true;
    }
    return x;
  }
};

/// Reduced objective c(F(x0, u), u) over controls: one rollout per value, one
/// rollout (cached) plus one backward sweep per gradient.
ObjectiveOracle make_reduced_oracle(const ShootingProblem& prob,
                                    std::shared_ptr<RolloutCache> cache);

/// Builds the constraint blocks for the state constraints of `prob` (values
/// gathered from the cached rollout, Jacobian-transpose products by the
/// backward sweep).
std::vector<ConstraintBlock> make_state_blocks(const ShootingProblem& prob,
                                               std::shared_ptr<RolloutCache> cache);

/// Solves the shooting problem with the augmented Lagrangian outer loop; with
/// no state constraints this is a single projected-gradient solve over the
/// control domain.
AlspgResult solve_ocp(const ShootingProblem& prob, const Vector& u0, const AlspgConfig& cfg);

/// Convenience: per-timestep control box replicated across the horizon.
std::shared_ptr<const ProjectableSet> make_control_box(const Vector& lo, const Vector& hi,
                                                       int horizon);

}  // namespace alspg
