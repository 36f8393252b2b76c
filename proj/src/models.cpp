#include "alspg/models.hpp"

#include <cmath>
#include <utility>

namespace alspg {

DynamicsModel single_integrator(int dim, double dt) {
  DynamicsModel m;
  m.name = "single_integrator";
  m.state_dim = dim;
  m.control_dim = dim;
  m.dt = dt;
  m.step = [dt](const Vector& x, const Vector& u) { return Vector(x + dt * u); };
  m.linearize = [dim, dt](const Vector&, const Vector&, Matrix& A, Matrix& B) {
    A = Matrix::Identity(dim, dim);
    B = dt * Matrix::Identity(dim, dim);
  };
  return m;
}

DynamicsModel double_integrator(int dim, double dt) {
  DynamicsModel m;
  m.name = "double_integrator";
  m.state_dim = 2 * dim;
  m.control_dim = dim;
  m.dt = dt;
  m.step = [dim, dt](const Vector& x, const Vector& u) {
    Vector next(2 * dim);
    next.head(dim) = x.head(dim) + dt * x.tail(dim);
    next.tail(dim) = x.tail(dim) + dt * u;
    return next;
  };
  m.linearize = [dim, dt](const Vector&, const Vector&, Matrix& A, Matrix& B) {
    A = Matrix::Identity(2 * dim, 2 * dim);
    A.topRightCorner(dim, dim) = dt * Matrix::Identity(dim, dim);
    B = Matrix::Zero(2 * dim, dim);
    B.bottomRows(dim) = dt * Matrix::Identity(dim, dim);
  };
  return m;
}

DynamicsModel arm_joint_integrator(int dof, double dt) {
  DynamicsModel m = double_integrator(dof, dt);
  m.name = "arm_joint_integrator";
  return m;
}

DynamicsModel pendulum(double dt, const PendulumParams& p) {
  DynamicsModel m;
  m.name = "pendulum";
  m.state_dim = 2;
  m.control_dim = 1;
  m.dt = dt;
  const double inertia = p.mass * p.length * p.length;
  m.step = [dt, p, inertia](const Vector& x, const Vector& u) {
    Vector next(2);
    next[0] = x[0] + dt * x[1];
    next[1] = x[1] + dt * (u[0] - p.damping * x[1] - p.mass * p.gravity * p.length * std::sin(x[0])) / inertia;
    return next;
  };
  m.linearize = [dt, p, inertia](const Vector& x, const Vector&, Matrix& A, Matrix& B) {
    A = Matrix::Identity(2, 2);
    A(0, 1) = dt;
    A(1, 0) = -dt * p.mass * p.gravity * p.length * std::cos(x[0]) / inertia;
    A(1, 1) = 1.0 - dt * p.damping / inertia;
    B = Matrix::Zero(2, 1);
    B(1, 0) = dt / inertia;
  };
  return m;
}

DynamicsModel car_point(double dt) {
  DynamicsModel m = double_integrator(2, dt);
  m.name = "car_point";
  return m;
}

DynamicsModel car_bicycle(double dt, double wheelbase) {
  DynamicsModel m;
  m.name = "car_bicycle";
  m.state_dim = 4;
  m.control_dim = 2;
  m.dt = dt;
  m.step = [dt, wheelbase](const Vector& x, const Vector& u) {
    const double theta = x[2], v = x[3], delta = u[0], a = u[1];
    Vector next(4);
    next[0] = x[0] + dt * v * std::cos(theta);
    next[1] = x[1] + dt * v * std::sin(theta);
    next[2] = theta + dt * v * std::tan(delta) / wheelbase;
    next[3] = v + dt * a;
    return next;
  };
  m.linearize = [dt, wheelbase](const Vector& x, const Vector& u, Matrix& A, Matrix& B) {
    const double theta = x[2], v = x[3], delta = u[0];
    A = Matrix::Identity(4, 4);
    A(0, 2) = -dt * v * std::sin(theta);
    A(0, 3) = dt * std::cos(theta);
    A(1, 2) = dt * v * std::cos(theta);
    A(1, 3) = dt * std::sin(theta);
    A(2, 3) = dt * std::tan(delta) / wheelbase;
    B = Matrix::Zero(4, 2);
    const double cd = std::cos(delta);
    B(2, 0) = dt * v / (wheelbase * cd * cd);
    B(3, 1) = dt;
  };
  return m;
}

DynamicsModel pusher_slider_dynamics(double dt, const PusherParams& p) {
  DynamicsModel m;
  m.name = "pusher_slider";
  m.state_dim = 4;  // slider pose (x, y, theta) + contact offset along the face
  m.control_dim = 2;

  m.dt = dt;
  const double a = p.half_length;
  const double c2 = p.ls_ratio * p.ls_ratio;
  const double k1 = c2 + a * a;

  // Ellipsoidal limit surface, sticking contact at (-a, phi) in the slider
  // frame: the pusher velocity (un, ut) maps to the body twist below.
  const auto body_twist = [a, c2, k1](double phi, double un, double ut, double& vx, double& vy,
                                      double& w) {
    const double D = k1 + phi * phi;
    vx = (k1 * un - a * phi * ut) / D;
    vy = (-a * phi * un + (c2 + phi * phi) * ut) / D;
    w = -(a * vy + phi * vx) / c2;
  };

  m.step = [dt, body_twist](const Vector& x, const Vector& u) {
    const double theta = x[2], phi = x[3];
    const double un = u[0], ut = u[1];
    Vector next = x;
    if (un < 0.0) return next;  // contact separation: slider rests
    double vx, vy, w;
    body_twist(phi, un, ut, vx, vy, w);
    const double ct = std::cos(theta), st = std::sin(theta);
    next[0] += dt * (ct * vx - st * vy);
    next[1] += dt * (st * vx + ct * vy);
    next[2] += dt * w;
    return next;
  };

  m.linearize = [dt, a, c2, k1, body_twist](const Vector& x, const Vector& u, Matrix& A,
                                            Matrix& B) {
    A = Matrix::Identity(4, 4);
    B = Matrix::Zero(4, 2);
    const double theta = x[2], phi = x[3];
    const double un = u[0], ut = u[1];
    if (un < 0.0) return;
    double vx, vy, w;
    body_twist(phi, un, ut, vx, vy, w);
    const double D = k1 + phi * phi;
    const double dvx_dphi = (-a * ut - 2.0 * phi * vx) / D;
    const double dvy_dphi = (-a * un + 2.0 * phi * ut - 2.0 * phi * vy) / D;
    const double dw_dphi = -(a * dvy_dphi + vx + phi * dvx_dphi) / c2;
    const double dvx_dun = k1 / D, dvx_dut = -a * phi / D;
    const double dvy_dun = -a * phi / D, dvy_dut = (c2 + phi * phi) / D;
    const double dw_dun = -(a * dvy_dun + phi * dvx_dun) / c2;
    const double dw_dut = -(a * dvy_dut + phi * dvx_dut) / c2;

    const double ct = std::cos(theta), st = std::sin(theta);
    A(0, 2) = dt * (-st * vx - ct * vy);
    A(1, 2) = dt * (ct * vx - st * vy);
    A(0, 3) = dt * (ct * dvx_dphi - st * dvy_dphi);
    A(1, 3) = dt * (st * dvx_dphi + ct * dvy_dphi);
    A(2, 3) = dt * dw_dphi;

    B(0, 0) = dt * (ct * dvx_dun - st * dvy_dun);
    B(0, 1) = dt * (ct * dvx_dut - st * dvy_dut);
    B(1, 0) = dt * (st * dvx_dun + ct * dvy_dun);
    B(1, 1) = dt * (st * dvx_dut + ct * dvy_dut);
    B(2, 0) = dt * dw_dun;
    B(2, 1) = dt * dw_dut;
  };
  return m;
}

// ---------------------------------------------------------------------------
// QuadraticStageCost

QuadraticStageCost::QuadraticStageCost(Matrix Q, Matrix R, Matrix Qf, Vector x_ref, Vector x_goal)
    : Q_(std::move(Q)),
      R_(std::move(R)),
      Qf_(std::move(Qf)),
      x_ref_(std::move(x_ref)),
      x_goal_(std::move(x_goal)) {}

QuadraticStageCost QuadraticStageCost::goal_only(int state_dim, int control_dim, double r_weight,
                                                 Matrix Qf, Vector x_goal) {
  return {Matrix::Zero(state_dim, state_dim),
          r_weight * Matrix::Identity(control_dim, control_dim), std::move(Qf),
          Vector::Zero(state_dim), std::move(x_goal)};
}

double QuadraticStageCost::running(int, const Vector& x_t, const Vector& u_t) const {
  const Vector dx = x_t - x_ref_;
  return 0.5 * dx.dot(Q_ * dx) + 0.5 * u_t.dot(R_ * u_t);
}

void QuadraticStageCost::running_gradient(int, const Vector& x_t, const Vector& u_t, Vector& gx,
                                          Vector& gu) const {
  gx = Q_ * (x_t - x_ref_);
  gu = R_ * u_t;
}

void QuadraticStageCost::running_quadratic(int, const Vector& x_t, const Vector& u_t, Matrix& Qxx,
                                           Matrix& Ruu, Vector& qx, Vector& ru) const {
  Qxx = Q_;
  Ruu = R_;
  qx = Q_ * (x_t - x_ref_);
  ru = R_ * u_t;
}

double QuadraticStageCost::terminal(const Vector& x_T) const {
  const Vector dx = x_T - x_goal_;
  return 0.5 * dx.dot(Qf_ * dx);
}

void QuadraticStageCost::terminal_gradient(const Vector& x_T, Vector& gx) const {
  gx = Qf_ * (x_T - x_goal_);
}

void QuadraticStageCost::terminal_quadratic(const Vector& x_T, Matrix& Qxx, Vector& qx) const {
  Qxx = Qf_;
  qx = Qf_ * (x_T - x_goal_);
}

}  // namespace alspg
