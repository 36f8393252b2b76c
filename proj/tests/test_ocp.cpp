#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alspg/ilqr.hpp"
#include "alspg/models.hpp"
#include "alspg/ocp.hpp"
#include "alspg/rng.hpp"
#include "support/oracles.hpp"

using namespace alspg;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

/// Scalar linear test system x' = a x + b u (no dt scaling).
DynamicsModel scalar_linear(double a, double b) {
  DynamicsModel m;
  m.name = "scalar_linear";
  m.state_dim = 1;
  m.control_dim = 1;
  m.dt = 1.0;
  m.step = [a, b](const Vector& x, const Vector& u) { return Vector(a * x + b * u); };
  m.linearize = [a, b](const Vector&, const Vector&, Matrix& A, Matrix& B) {
    A = Matrix::Constant(1, 1, a);
    B = Matrix::Constant(1, 1, b);
  };
  return m;
}

/// Smooth nonlinear system whose linearization varies along the trajectory,
/// exercising the backward sweep on a genuinely time-varying chain.
DynamicsModel tanh_system(int m_dim, int n_dim, Rng& rng) {
  const Matrix W = Matrix::NullaryExpr(m_dim, m_dim, [&rng](Index, Index) { return 0.4 * rng.normal(); });
  const Matrix B = Matrix::NullaryExpr(m_dim, n_dim, [&rng](Index, Index) { return rng.normal(); });
  DynamicsModel m;
  m.name = "tanh_system";
  m.state_dim = m_dim;
  m.control_dim = n_dim;
  m.dt = 0.1;
  m.step = [W, B, m_dim](const Vector& x, const Vector& u) {
    Vector next = x + B * u * 0.1;
    for (Index i = 0; i < m_dim; ++i) next[i] += 0.1 * std::tanh(W.row(i).dot(x));
    return next;
  };
  m.linearize = [W, B, m_dim](const Vector& x, const Vector&, Matrix& A, Matrix& Bm) {
    A = Matrix::Identity(m_dim, m_dim);
    for (Index i = 0; i < m_dim; ++i) {
      const double th = std::tanh(W.row(i).dot(x));
      A.row(i) += 0.1 * (1.0 - th * th) * W.row(i);
    }
    Bm = B * 0.1;
  };
  return m;
}

}  // namespace

TEST_CASE("rollout follows the dynamics and flags blow-ups") {
  const DynamicsModel si = single_integrator(1, 0.1);
  const Vector x = rollout(si, vec({0.0}), Vector::Ones(5));
  CHECK(x.isApprox(vec({0.1, 0.2, 0.3, 0.4, 0.5})));

  const DynamicsModel doubling = scalar_linear(2.0, 0.0);
  CHECK(rollout(doubling, vec({1.0}), Vector::Zero(3)).isApprox(vec({2.0, 4.0, 8.0})));

  // Double integrator final state against the closed-form convolution sum.
  Rng rng(2);
  const double dt = 0.1;
  const int T = 15;
  const DynamicsModel di = double_integrator(1, dt);
  const Vector u = rng.normal_vector(T);
  const Vector x0 = vec({0.3, -0.2});
  const Vector xs = rollout(di, x0, u);
  double v = x0[1], p = x0[0];
  for (int t = 0; t < T; ++t) p += dt * (x0[1] + dt * u.head(t).sum());
  v = x0[1] + dt * u.sum();
  CHECK(xs[traj_index(T - 1, 2)] == doctest::Approx(p).epsilon(1e-12));
  CHECK(xs[traj_index(T - 1, 2) + 1] == doctest::Approx(v).epsilon(1e-12));

  // Unstable dynamics overflow carries the offending timestep.
  const DynamicsModel exploding = scalar_linear(1e200, 0.0);
  try {
    rollout(exploding, vec({1.0}), Vector::Zero(4));
    FAIL("expected RolloutError");
  } catch (const RolloutError& e) {
    CHECK(e.timestep == 1);  // 1e200 is finite, squaring it is not
  }
}

TEST_CASE("adjoint backward sweep reproduces the hand-worked chain") {
  const DynamicsModel sys = scalar_linear(2.0, 1.0);
  const Vector u = Vector::Zero(2);
  const Vector x = rollout(sys, vec({1.0}), u);
  CHECK(adjoint_vjp(sys, vec({1.0}), u, x, vec({1.0, 1.0})).isApprox(vec({3.0, 1.0})));
  CHECK(adjoint_vjp(sys, vec({1.0}), u, x, Vector::Zero(2)).isZero());
}

TEST_CASE("adjoint backward sweep equals the dense sensitivity oracle") {
  Rng rng(23);
  for (const int T : {1, 2, 10, 40}) {
    for (const int m : {1, 3}) {
      for (const int n : {1, 2}) {
        DynamicsModel sys = tanh_system(m, n, rng);
        const Vector x0 = rng.normal_vector(m);
        const Vector u = rng.normal_vector(static_cast<Index>(T) * n);
        const Vector x = rollout(sys, x0, u);
        const Matrix Jt = oracles::dense_rollout_jacobian_t(sys, x0, u, x);
        for (int trial = 0; trial < 3; ++trial) {
          const Vector y = rng.normal_vector(static_cast<Index>(T) * m);
          const Vector z = adjoint_vjp(sys, x0, u, x, y);
          CHECK((z - Jt * y).lpNorm<Eigen::Infinity>() <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("reduced objective gradient matches finite differences") {
  Rng rng(29);
  ShootingProblem prob;
  prob.dynamics = pendulum(0.05);
  prob.horizon = 12;
  prob.x0 = vec({M_PI, 0.0});
  Matrix Qf = Matrix::Identity(2, 2) * 5.0;
  prob.cost = std::make_shared<QuadraticStageCost>(0.1 * Matrix::Identity(2, 2),
                                                   0.01 * Matrix::Identity(1, 1), Qf,
                                                   Vector::Zero(2), Vector::Zero(2));
  auto cache = std::make_shared<RolloutCache>();
  const ObjectiveOracle oracle = make_reduced_oracle(prob, cache);

  for (int i = 0; i < 5; ++i) {
    const Vector u = rng.normal_vector(prob.control_size());
    const Vector g = oracle.gradient(u);
    const Vector fd =
        oracles::fd_gradient([&](const Vector& z) { return oracle.value(z); }, u, 1e-6);
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("zero cost gives a zero reduced gradient") {
  ShootingProblem prob;
  prob.dynamics = double_integrator(1, 0.1);
  prob.horizon = 6;
  prob.x0 = Vector::Zero(2);
  prob.cost = std::make_shared<QuadraticStageCost>(Matrix::Zero(2, 2), Matrix::Zero(1, 1),
                                                   Matrix::Zero(2, 2), Vector::Zero(2),
                                                   Vector::Zero(2));
  auto cache = std::make_shared<RolloutCache>();
  const ObjectiveOracle oracle = make_reduced_oracle(prob, cache);
  CHECK(oracle.gradient(Vector::Ones(6)).isZero());
}

TEST_CASE("horizon one reduces to the single-step chain rule") {
  ShootingProblem prob;
  prob.dynamics = double_integrator(1, 0.1);
  prob.horizon = 1;
  prob.x0 = vec({0.4, -0.3});
  const Matrix Qf = (Matrix(2, 2) << 3.0, 0.5, 0.5, 2.0).finished();
  const Vector goal = vec({1.0, 0.0});
  prob.cost = std::make_shared<QuadraticStageCost>(Matrix::Zero(2, 2),
                                                   0.2 * Matrix::Identity(1, 1), Qf,
                                                   Vector::Zero(2), goal);
  auto cache = std::make_shared<RolloutCache>();
  const ObjectiveOracle oracle = make_reduced_oracle(prob, cache);
  const Vector u = vec({0.7});
  Matrix A, B;
  const Vector x1 = prob.dynamics.step(prob.x0, u);
  prob.dynamics.linearize(prob.x0, u, A, B);
  const Vector expected = 0.2 * u + B.transpose() * (Qf * (x1 - goal));
  CHECK(oracle.gradient(u).isApprox(expected, 1e-12));
}

TEST_CASE("unconstrained point-to-point matches the Riccati oracle") {
  const double dt = 0.1;
  const int T = 25;
  ShootingProblem prob;
  prob.dynamics = double_integrator(1, dt);
  prob.horizon = T;
  prob.x0 = vec({-1.0, 0.0});
  const Matrix Q = 1e-4 * Matrix::Identity(2, 2);
  const Matrix R = 1e-2 * Matrix::Identity(1, 1);
  const Matrix Qf = 50.0 * Matrix::Identity(2, 2);
  // Track the origin so the oracle's regulator form applies directly.
  prob.cost =
      std::make_shared<QuadraticStageCost>(Q, R, Qf, Vector::Zero(2), Vector::Zero(2));

  AlspgConfig cfg;
  cfg.inner.tol = 1e-8;
  cfg.inner.max_iter = 5000;
  const AlspgResult res = solve_ocp(prob, Vector::Zero(T), cfg);
  CHECK(res.status == AlspgStatus::converged);

  Matrix A, B;
  prob.dynamics.linearize(prob.x0, Vector::Zero(1), A, B);
  const Vector u_star = oracles::lqr_optimal_controls(A, B, Q, R, Qf, prob.x0, T);
  auto cache = std::make_shared<RolloutCache>();
  const ObjectiveOracle oracle = make_reduced_oracle(prob, cache);
  const double c_spg = oracle.value(res.x_star);
  const double c_lqr = oracle.value(u_star);
  CHECK(c_spg <= c_lqr * 1.01 + 1e-12);

  const Vector xs = rollout(prob.dynamics, prob.x0, res.x_star);
  const Vector xl = rollout(prob.dynamics, prob.x0, u_star);
  CHECK((xs.tail(2) - xl.tail(2)).norm() <= 1e-3);
}

TEST_CASE("control box keeps every returned control feasible") {
  ShootingProblem prob;
  prob.dynamics = double_integrator(1, 0.1);
  prob.horizon = 20;
  prob.x0 = vec({-2.0, 0.0});
  prob.cost = std::make_shared<QuadraticStageCost>(Matrix::Zero(2, 2),
                                                   1e-3 * Matrix::Identity(1, 1),
                                                   30.0 * Matrix::Identity(2, 2),
                                                   Vector::Zero(2), Vector::Zero(2));
  prob.control_domain = make_control_box(vec({-0.5}), vec({0.5}), prob.horizon);
  const AlspgResult res = solve_ocp(prob, Vector::Zero(20), {});
  for (Index i = 0; i < res.x_star.size(); ++i) {
    CHECK(res.x_star[i] >= -0.5 - 1e-9);
    CHECK(res.x_star[i] <= 0.5 + 1e-9);
  }
}

TEST_CASE("state keep-out disk is cleared along the whole rollout") {
  const double dt = 0.1;
  const int T = 40;
  ShootingProblem prob;
  prob.dynamics = double_integrator(2, dt);  // state (px, py, vx, vy)
  prob.horizon = T;
  prob.x0 = vec({-1.0, 0.0, 0.0, 0.0});
  Matrix Qf = Matrix::Zero(4, 4);
  Qf.diagonal() << 60.0, 60.0, 10.0, 10.0;
  Vector goal = vec({1.0, 0.0, 0.0, 0.0});
  prob.cost = std::make_shared<QuadraticStageCost>(Matrix::Zero(4, 4),
                                                   1e-2 * Matrix::Identity(2, 2), Qf,
                                                   goal, goal);
  const double radius = 0.4;
  StateConstraint keepout;
  keepout.name = "disk";
  keepout.selector = Matrix::Zero(2, 4);
  keepout.selector(0, 0) = 1.0;
  keepout.selector(1, 1) = 1.0;
  keepout.set = std::make_shared<QuadricAnnulusSet>(
      QuadricAnnulusSet::ball_exterior(Vector::Zero(2), radius));
  prob.state_constraints.push_back(keepout);

  AlspgConfig cfg;
  cfg.max_outer = 60;
  // Nudge off the symmetry axis so the detour picks a side.
  Vector u0 = Vector::Zero(prob.control_size());
  u0[1] = 0.05;
  const AlspgResult res = solve_ocp(prob, u0, cfg);
  CHECK(res.status == AlspgStatus::converged);
  CHECK(res.max_V <= cfg.outer_tol);

  const Vector xs = rollout(prob.dynamics, prob.x0, res.x_star);
  double min_dist = 1e300;
  for (int t = 0; t < T; ++t) {
    min_dist = std::min(min_dist, xs.segment(traj_index(t, 4), 2).norm());
  }
  CHECK(min_dist >= radius - 1e-3);
  // And the goal is still reached.
  CHECK((xs.segment(traj_index(T - 1, 4), 2) - goal.head(2)).norm() <= 0.05);
}

TEST_CASE("riccati baseline solves an LQR problem in one accepted step") {
  ShootingProblem prob;
  prob.dynamics = double_integrator(1, 0.1);
  prob.horizon = 15;
  prob.x0 = vec({1.0, -0.5});
  const Matrix Q = 0.1 * Matrix::Identity(2, 2);
  const Matrix R = 0.05 * Matrix::Identity(1, 1);
  const Matrix Qf = 10.0 * Matrix::Identity(2, 2);
  prob.cost = std::make_shared<QuadraticStageCost>(Q, R, Qf, Vector::Zero(2), Vector::Zero(2));

  IlqrConfig cfg;
  cfg.tol = 1e-7;
  const SpgResult res = ilqr_baseline(prob, Vector::Zero(15), cfg);
  CHECK(res.status == SpgStatus::converged);
  CHECK(res.iterations == 1);

  Matrix A, B;
  prob.dynamics.linearize(prob.x0, Vector::Zero(1), A, B);
  const Vector u_star = oracles::lqr_optimal_controls(A, B, Q, R, Qf, prob.x0, prob.horizon);
  CHECK((res.x_star - u_star).lpNorm<Eigen::Infinity>() <= 1e-4);

  // Counter bookkeeping: one linearize+backward sweep per iteration, at least
  // one rollout each plus the initial cost evaluation.
  CHECK(res.n_jvp_calls == res.iterations + 1);
  CHECK(res.n_value_calls >= res.iterations + 1);
}

TEST_CASE("riccati baseline and projected gradient agree on a pendulum swing") {
  // A swing inside a single cost basin, so both solvers must reach the same
  // optimum; the long projected-gradient run is the reference.
  ShootingProblem prob;
  prob.dynamics = pendulum(0.05);
  prob.horizon = 30;
  prob.x0 = vec({0.8, 0.0});  // swing up the remaining 0.8 rad
  const Matrix Q = 1e-3 * Matrix::Identity(2, 2);
  const Matrix R = 1e-2 * Matrix::Identity(1, 1);
  Matrix Qf = Matrix::Zero(2, 2);
  Qf.diagonal() << 30.0, 3.0;
  prob.cost = std::make_shared<QuadraticStageCost>(Q, R, Qf, Vector::Zero(2), Vector::Zero(2));

  IlqrConfig icfg;
  icfg.tol = 1e-10;
  icfg.max_iter = 500;
  const SpgResult ilqr_res = ilqr_baseline(prob, Vector::Zero(30), icfg);

  AlspgConfig cfg;
  cfg.inner.tol = 1e-10;
  cfg.inner.max_iter = 200000;
  const AlspgResult spg_res = solve_ocp(prob, Vector::Zero(30), cfg);

  CHECK(ilqr_res.status == SpgStatus::converged);
  CHECK(spg_res.status == AlspgStatus::converged);
  CHECK(std::abs(ilqr_res.f_star - spg_res.f_star) <= 1e-6 * std::max(1.0, spg_res.f_star));
}

TEST_CASE("bundled model linearizations match finite differences") {
  Rng rng(37);
  const std::vector<DynamicsModel> models = {
      single_integrator(2, 0.1), double_integrator(2, 0.1), pendulum(0.05),
      car_bicycle(0.1),          pusher_slider_dynamics(0.1)};
  for (const auto& model : models) {
    for (int i = 0; i < 100; ++i) {
      Vector x = rng.normal_vector(model.state_dim);
      Vector u = rng.normal_vector(model.control_dim);
      if (model.name == "pusher_slider") {
        x[3] = rng.uniform(-0.05, 0.05);  // contact stays on the pushed face
        u[0] = rng.uniform(0.05, 0.5);    // sticking contact, no separation
      }
      if (model.name == "car_bicycle") {
        u[0] = rng.uniform(-0.5, 0.5);  // steering within the tan() range
      }
      Matrix A, B;
      model.linearize(x, u, A, B);
      const Matrix A_fd = oracles::fd_jacobian(
          [&](const Vector& z) { return model.step(z, u); }, x, 1e-6);
      const Matrix B_fd = oracles::fd_jacobian(
          [&](const Vector& z) { return model.step(x, z); }, u, 1e-6);
      const double tol = model.name == "pusher_slider" ? 1e-4 : 1e-5;
      CHECK((A - A_fd).cwiseAbs().maxCoeff() <= tol * std::max(1.0, A_fd.norm()));
      CHECK((B - B_fd).cwiseAbs().maxCoeff() <= tol * std::max(1.0, B_fd.norm()));
    }
  }
}
