#include "alspg/ocp.hpp"

#include <cmath>

namespace alspg {

Vector rollout(const DynamicsModel& dyn, const Vector& x0, const Vector& u) {
  const int m = dyn.state_dim, n = dyn.control_dim;
  if (x0.size() != m) throw std::invalid_argument("rollout: x0 dimension mismatch");
  if (u.size() % n != 0) throw std::invalid_argument("rollout: control vector not a multiple of control_dim");
  const int T = static_cast<int>(u.size() / n);
  Vector x(static_cast<Index>(T) * m);
  Vector cur = x0;
  for (int t = 0; t < T; ++t) {
    cur = dyn.step(cur, u.segment(traj_index(t, n), n));
    if (!cur.allFinite()) {
      throw RolloutError(t, "rollout: non-finite state at timestep " + std::to_string(t + 1));
    }
    x.segment(traj_index(t, m), m) = cur;
  }
  return x;
}

Vector adjoint_vjp(const DynamicsModel& dyn, const Vector& x0, const Vector& u, const Vector& x,
                   const Vector& y) {
  const int m = dyn.state_dim, n = dyn.control_dim;
  const int T = static_cast<int>(u.size() / n);
  if (x.size() != static_cast<Index>(T) * m || y.size() != x.size()) {
    throw std::invalid_argument("adjoint_vjp: trajectory/cotangent dimension mismatch");
  }
  Vector z(u.size());
  Matrix A(m, m), B(m, n);
  // Backward sweep: v carries y_t + A_t^T v accumulated from the tail; only
  // the current linearization is held.
  const auto state_at = [&](int t) -> Vector {
    return t == 0 ? x0 : Vector(x.segment(traj_index(t - 1, m), m));
  };
  Vector v = y.segment(traj_index(T - 1, m), m);
  dyn.linearize(state_at(T - 1), u.segment(traj_index(T - 1, n), n), A, B);
  z.segment(traj_index(T - 1, n), n) = B.transpose() * v;
  for (int t = T - 2; t >= 0; --t) {
    Matrix A_next = A;  // linearization at t+1, consumed by the adjoint update
    dyn.linearize(state_at(t), u.segment(traj_index(t, n), n), A, B);
    v = y.segment(traj_index(t, m), m) + A_next.transpose() * v;
    z.segment(traj_index(t, n), n) = B.transpose() * v;
  }
  return z;
}

double trajectory_cost(const StageCost& cost, const DynamicsModel& dyn, const Vector& x0,
                       const Vector& x, const Vector& u) {
  const int m = dyn.state_dim, n = dyn.control_dim;
  const int T = static_cast<int>(u.size() / n);
  double c = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vector x_t = t == 0 ? x0 : Vector(x.segment(traj_index(t - 1, m), m));
    c += cost.running(t, x_t, u.segment(traj_index(t, n), n));
  }
  c += cost.terminal(x.segment(traj_index(T - 1, m), m));
  return c;
}

void trajectory_cost_gradients(const StageCost& cost, const DynamicsModel& dyn, const Vector& x0,
                               const Vector& x, const Vector& u, Vector& grad_x, Vector& grad_u) {
  const int m = dyn.state_dim, n = dyn.control_dim;
  const int T = static_cast<int>(u.size() / n);
  grad_x.setZero(x.size());
  grad_u.setZero(u.size());
  Vector gx, gu;
  for (int t = 0; t < T; ++t) {
    const Vector x_t = t == 0 ? x0 : Vector(x.segment(traj_index(t - 1, m), m));
    cost.running_gradient(t, x_t, u.segment(traj_index(t, n), n), gx, gu);
    grad_u.segment(traj_index(t, n), n) += gu;
    if (t >= 1) grad_x.segment(traj_index(t - 1, m), m) += gx;  // x_0 is fixed
  }
  cost.terminal_gradient(x.segment(traj_index(T - 1, m), m), gx);
  grad_x.segment(traj_index(T - 1, m), m) += gx;
}

ObjectiveOracle make_reduced_oracle(const ShootingProblem& prob,
                                    std::shared_ptr<RolloutCache> cache) {
  if (!prob.cost) throw std::invalid_argument("make_reduced_oracle: missing cost");
  auto value = [&prob, cache](const Vector& u) {
    const Vector& x = cache->states(prob.dynamics, prob.x0, u);
    return trajectory_cost(*prob.cost, prob.dynamics, prob.x0, x, u);
  };
  auto gradient = [&prob, cache](const Vector& u) {
    const Vector& x = cache->states(prob.dynamics, prob.x0, u);
    Vector grad_x, grad_u;
    trajectory_cost_gradients(*prob.cost, prob.dynamics, prob.x0, x, u, grad_x, grad_u);
    return Vector(grad_u + adjoint_vjp(prob.dynamics, prob.x0, u, x, grad_x));
  };
  return {std::move(value), std::move(gradient)};
}

std::vector<ConstraintBlock> make_state_blocks(const ShootingProblem& prob,
                                               std::shared_ptr<RolloutCache> cache) {
  std::vector<ConstraintBlock> blocks;
  const int m = prob.dynamics.state_dim;
  for (const auto& sc : prob.state_constraints) {
    if (!sc.set) throw std::invalid_argument("make_state_blocks: constraint without a set");
    std::vector<int> steps = sc.timesteps;
    if (steps.empty()) {
      steps.resize(prob.horizon);
      for (int t = 1; t <= prob.horizon; ++t) steps[t - 1] = t;
    }
    for (int t : steps) {
      if (t < 1 || t > prob.horizon) {
        throw std::invalid_argument("make_state_blocks: timestep outside 1..T");
      }
    }
    const Matrix S = sc.selector;
    const Index k = S.rows();
    if (S.cols() != m) throw std::invalid_argument("make_state_blocks: selector column mismatch");

    std::shared_ptr<const ProjectableSet> set = sc.set;
    if (steps.size() > 1) set = std::make_shared<ReplicatedSet>(sc.set, steps.size());

    ConstraintBlock b;
    b.name = sc.name;
    b.set = std::move(set);
    b.g = [&prob, cache, S, steps, k, m](const Vector& u) {
      const Vector& x = cache->states(prob.dynamics, prob.x0, u);
      Vector out(static_cast<Index>(steps.size()) * k);
      for (size_t i = 0; i < steps.size(); ++i) {
        out.segment(static_cast<Index>(i) * k, k) = S * x.segment(traj_index(steps[i] - 1, m), m);
      }
      return out;
    };
    b.jvp_t = [&prob, cache, S, steps, k, m](const Vector& u, const Vector& r) {
      const Vector& x = cache->states(prob.dynamics, prob.x0, u);
      Vector y = Vector::Zero(x.size());
      for (size_t i = 0; i < steps.size(); ++i) {
        y.segment(traj_index(steps[i] - 1, m), m) +=
            S.transpose() * r.segment(static_cast<Index>(i) * k, k);
      }
      return adjoint_vjp(prob.dynamics, prob.x0, u, x, y);
    };
    blocks.push_back(std::move(b));
  }
  return blocks;
}

AlspgResult solve_ocp(const ShootingProblem& prob, const Vector& u0, const AlspgConfig& cfg) {
  if (u0.size() != prob.control_size()) {
    throw std::invalid_argument("solve_ocp: control vector size mismatch");
  }
  auto cache = std::make_shared<RolloutCache>();
  const ObjectiveOracle oracle = make_reduced_oracle(prob, cache);
  const FreeSet free_domain;
  const ProjectableSet& domain = prob.control_domain ? *prob.control_domain : free_domain;
  std::vector<ConstraintBlock> blocks = make_state_blocks(prob, cache);
  return alspg_solve(oracle, domain, std::move(blocks), u0, cfg);
}

std::shared_ptr<const ProjectableSet> make_control_box(const Vector& lo, const Vector& hi,
                                                       int horizon) {
  auto base = std::make_shared<BoxSet>(lo, hi);
  if (horizon == 1) return base;
  return std::make_shared<ReplicatedSet>(std::move(base), horizon);
}

}  // namespace alspg
