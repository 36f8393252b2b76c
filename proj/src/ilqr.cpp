#include "alspg/ilqr.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace alspg {

namespace {

struct BackwardPass {
  bool ok = false;
  std::vector<Vector> k;  // feedforward
  std::vector<Matrix> K;  // feedback
  double d1 = 0.0;        // expected-improvement coefficients
  double d2 = 0.0;
};

BackwardPass riccati_backward(const ShootingProblem& prob, const Vector& x0, const Vector& x,
                              const Vector& u, const std::vector<Matrix>& A,
                              const std::vector<Matrix>& B, double reg) {
  const int m = prob.dynamics.state_dim, n = prob.dynamics.control_dim;
  const int T = prob.horizon;
  BackwardPass bp;
  bp.k.resize(T);
  bp.K.resize(T);

  Matrix Vxx(m, m);
  Vector Vx(m);
  prob.cost->terminal_quadratic(x.segment(traj_index(T - 1, m), m), Vxx, Vx);

  Matrix Qxx(m, m), Ruu(n, n);
  Vector qx(m), ru(n);
  for (int t = T - 1; t >= 0; --t) {
    const Vector x_t = t == 0 ? x0 : Vector(x.segment(traj_index(t - 1, m), m));
    const Vector u_t = u.segment(traj_index(t, n), n);
    prob.cost->running_quadratic(t, x_t, u_t, Qxx, Ruu, qx, ru);

    const Vector Qx = qx + A[t].transpose() * Vx;
    const Vector Qu = ru + B[t].transpose() * Vx;
    const Matrix Qxx_t = Qxx + A[t].transpose() * Vxx * A[t];
    const Matrix Qux = B[t].transpose() * Vxx * A[t];
    Matrix Quu = Ruu + B[t].transpose() * Vxx * B[t];
    Quu.diagonal().array() += reg;
    if (!Quu.allFinite()) return bp;

    Eigen::LLT<Matrix> llt(Quu);
    if (llt.info() != Eigen::Success) return bp;  // not positive definite at this reg

    bp.k[t] = -llt.solve(Qu);
    bp.K[t] = -llt.solve(Qux);

    bp.d1 += bp.k[t].dot(Qu);
    bp.d2 += bp.k[t].dot(Quu * bp.k[t]);

    Vx = Qx + bp.K[t].transpose() * Quu * bp.k[t] + bp.K[t].transpose() * Qu +
         Qux.transpose() * bp.k[t];
    Vxx = Qxx_t + bp.K[t].transpose() * Quu * bp.K[t] + bp.K[t].transpose() * Qux +
          Qux.transpose() * bp.K[t];
    Vxx = 0.5 * (Vxx + Vxx.transpose()).eval();
  }
  bp.ok = true;
  return bp;
}

}  // namespace

SpgResult ilqr_baseline(const ShootingProblem& prob, const Vector& u0, const IlqrConfig& cfg) {
  if (!prob.state_constraints.empty() || prob.control_domain) {
    throw std::invalid_argument("ilqr_baseline: handles unconstrained problems only");
  }
  if (u0.size() != prob.control_size()) {
    throw std::invalid_argument("ilqr_baseline: control vector size mismatch");
  }
  const int m = prob.dynamics.state_dim, n = prob.dynamics.control_dim;
  const int T = prob.horizon;

  SpgResult res;
  Vector u = u0;
  Vector x = rollout(prob.dynamics, prob.x0, u);
  double cost = trajectory_cost(*prob.cost, prob.dynamics, prob.x0, x, u);
  res.n_value_calls = 1;

  // Regularization engages only when the control Hessian loses positive
  // definiteness or the line search stalls, climbing the ladder
  // reg_init..reg_max and decaying again after accepted steps.
  double reg = 0.0;
  const auto raise_reg = [&cfg](double r) { return r == 0.0 ? cfg.reg_init : r * cfg.reg_growth; };
  std::vector<Matrix> A(T), B(T);
  res.status = SpgStatus::max_iter;

  int accepted_steps = 0;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    for (int t = 0; t < T; ++t) {
      const Vector x_t = t == 0 ? prob.x0 : Vector(x.segment(traj_index(t - 1, m), m));
      prob.dynamics.linearize(x_t, u.segment(traj_index(t, n), n), A[t], B[t]);
    }
    ++res.n_jvp_calls;  // one linearization + backward sweep

    bool stepped = false;
    while (reg <= cfg.reg_max) {
      const BackwardPass bp = riccati_backward(prob, prob.x0, x, u, A, B, reg);
      if (!bp.ok) {
        reg = raise_reg(reg);
        continue;
      }

      double stationarity = 0.0;
      for (const auto& kt : bp.k) {
        stationarity = std::max(stationarity, kt.lpNorm<Eigen::Infinity>());
      }
      if (stationarity <= cfg.tol) {
        res.status = SpgStatus::converged;
        res.final_stationarity = stationarity;
        stepped = true;
        break;
      }

      double alpha = 1.0;
      bool accepted = false;
      Vector u_new(u.size()), x_new(x.size());
      double cost_new = cost;
      for (int bt = 0; bt <= cfg.max_backtracks && !accepted; ++bt) {
        Vector xi = prob.x0;
        bool finite = true;
        for (int t = 0; t < T; ++t) {
          const Vector x_prev = t == 0 ? prob.x0 : Vector(x.segment(traj_index(t - 1, m), m));
          const Vector ut = u.segment(traj_index(t, n), n) + alpha * bp.k[t] + bp.K[t] * (xi - x_prev);
          u_new.segment(traj_index(t, n), n) = ut;
          xi = prob.dynamics.step(xi, ut);
          if (!xi.allFinite()) {
            finite = false;
            break;
          }
          x_new.segment(traj_index(t, m), m) = xi;
        }
        if (finite) {
          cost_new = trajectory_cost(*prob.cost, prob.dynamics, prob.x0, x_new, u_new);
          ++res.n_value_calls;
          const double expected = -(alpha * bp.d1 + 0.5 * alpha * alpha * bp.d2);
          if (expected > 0.0 ? cost - cost_new >= cfg.armijo * expected : cost_new < cost) {
            accepted = true;
            res.history.push_back({accepted_steps, cost, stationarity, reg, alpha, bp.d1,
                                   res.n_value_calls, res.n_gradient_calls});
            break;
          }
        }
        alpha *= 0.5;
      }

      if (accepted) {
        u = u_new;
        x = x_new;
        cost = cost_new;
        reg = reg <= cfg.reg_init ? 0.0 : reg / cfg.reg_growth;
        ++accepted_steps;
        res.final_stationarity = stationarity;
        stepped = true;
        break;
      }
      reg = raise_reg(reg);  // no acceptable step at this regularization
    }

    if (res.status == SpgStatus::converged) break;
    if (!stepped) {
      res.status = SpgStatus::line_search_failed;
      break;
    }
  }

  res.x_star = u;
  res.f_star = cost;
  res.iterations = accepted_steps;
  res.final_gamma = reg;
  res.history.push_back({accepted_steps, cost, res.final_stationarity, reg, 0.0, 0.0,
                         res.n_value_calls, res.n_gradient_calls});
  return res;
}

}  // namespace alspg
