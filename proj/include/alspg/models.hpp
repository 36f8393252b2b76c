#pragma once

#include "alspg/ocp.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// x_{t+1} = x_t + dt * u_t.
DynamicsModel single_integrator(int dim, double dt);

/// Position/velocity double integrator: state (p, v), control = acceleration.
DynamicsModel double_integrator(int dim, double dt);

/// Joint-space double integrator for a dof-joint arm: state (q, qdot),
/// control = joint acceleration.
DynamicsModel arm_joint_integrator(int dof, double dt);

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double damping = 0.1;
};

/// Damped pendulum, state (theta, omega) with theta = 0 upright, control =
/// torque.
DynamicsModel pendulum(double dt, const PendulumParams& params = {});

/// Planar point car as a 2-D double integrator: state (x, y, vx, vy),
/// control = acceleration.
DynamicsModel car_point(double dt);

/// Kinematic bicycle: state (x, y, heading, speed), control (steering angle,
/// acceleration), wheelbase L.
DynamicsModel car_bicycle(double dt, double wheelbase = 2.7);

struct PusherParams {
  double half_length = 0.06;  // slider half-extent along x (pushed face at -x)
  double half_width = 0.06;
  double ls_ratio = 0.05;  // limit-surface ratio c = m_max / f_max
};

/// Quasi-static single-contact pusher-slider in sticking mode. State
/// (x, y, theta, contact offset), control = pusher velocity (normal,
/// tangential) in the slider frame. A pulling pusher (negative normal
/// velocity) leaves the slider at rest for that step.
DynamicsModel pusher_slider_dynamics(double dt, const PusherParams& params = {});

/// Quadratic tracking cost
///   sum_t 0.5 (x_t - x_ref)^T Q (x_t - x_ref) + 0.5 u_t^T R u_t
///   + 0.5 (x_T - x_goal)^T Qf (x_T - x_goal),
/// exact under quadratization.
class QuadraticStageCost final : public StageCost {
 public:
  QuadraticStageCost(Matrix Q, Matrix R, Matrix Qf, Vector x_ref, Vector x_goal);

  static QuadraticStageCost goal_only(int state_dim, int control_dim, double r_weight, Matrix Qf,
                                      Vector x_goal);

  double running(int t, const Vector& x_t, const Vector& u_t) const override;
  void running_gradient(int t, const Vector& x_t, const Vector& u_t, Vector& gx,
                        Vector& gu) const override;
  void running_quadratic(int t, const Vector& x_t, const Vector& u_t, Matrix& Qxx, Matrix& Ruu,
                         Vector& qx, Vector& ru) const override;
  double terminal(const Vector& x_T) const override;
  void terminal_gradient(const Vector& x_T, Vector& gx) const override;
  void terminal_quadratic(const Vector& x_T, Matrix& Qxx, Vector& qx) const override;

 private:
  Matrix Q_, R_, Qf_;
  Vector x_ref_, x_goal_;
};

}  // namespace alspg
