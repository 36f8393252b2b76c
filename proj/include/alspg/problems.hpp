#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "alspg/alspg.hpp"
#include "alspg/models.hpp"
#include "alspg/ocp.hpp"
#include "alspg/polygon.hpp"
#include "alspg/sets.hpp"
#include "alspg/types.hpp"

namespace alspg {

/// Standard normal CDF and its inverse. The quantile uses a rational
/// approximation polished by one Newton step on the CDF (absolute error well
/// below 1e-8).
double normal_cdf(double x);
double normal_quantile(double eta);

// ---------------------------------------------------------------------------
// Planar arm

struct PlanarArm {
  Vector link_lengths;
  std::shared_ptr<const BoxSet> joint_limits;  // null = unbounded joints

  int dof() const { return static_cast<int>(link_lengths.size()); }
};

PlanarArm make_planar_arm(Vector link_lengths, double joint_limit = M_PI);

struct FkResult {
  Vec2 position;
  Matrix jacobian;  // 2 x dof
};

/// Cumulative-angle planar forward kinematics of the end effector.
FkResult arm_fk(const PlanarArm& arm, const Vector& q);
/// Forward kinematics of the tip of link k (1-based; k = dof is the end
/// effector).
FkResult arm_link_tip(const PlanarArm& arm, const Vector& q, int k);
/// Center of mass with link masses proportional to lengths, each at its link
/// midpoint.
FkResult arm_com(const PlanarArm& arm, const Vector& q);

// ---------------------------------------------------------------------------
// Constrained problems over a decision vector

/// A constrained minimization instance ready for the augmented Lagrangian
/// solver.
struct ProblemInstance {
  ObjectiveOracle f;
  std::shared_ptr<const ProjectableSet> domain;
  std::vector<ConstraintBlock> blocks;
  Vector x0;
};

AlspgResult solve_instance(const ProblemInstance& inst, const AlspgConfig& cfg);

/// Inverse kinematics: stay close to q0 subject to the end effector lying in
/// a task-space target set (point, halfspace, annulus or box target).
ProblemInstance ik_problem(const PlanarArm& arm, const Vector& q0,
                           std::shared_ptr<const ProjectableSet> target_set);

/// Multi-constraint IK: center of mass in a box, end effector in a disk, and
/// the tip of an anchor link pinned to a point.
ProblemInstance multi_constraint_ik_problem(const PlanarArm& arm, const Vector& q0,
                                            std::shared_ptr<const BoxSet> com_box,
                                            const Vec2& ee_center, double ee_radius,
                                            int anchor_link, const Vec2& anchor_point);

struct ChanceConstraintSpec {
  Vector mu;     // mean hyperplane normal
  Matrix sigma;  // covariance of the normal (symmetric PSD)
  double eta;    // required satisfaction probability, >= 0.5
};

/// Chance-constrained IK: the end effector stays under the stochastic
/// hyperplane a^T f(q) <= 0, a ~ N(mu, Sigma), with probability eta. Encoded
/// as cone membership of g(q) = [(Sigma^{1/2} f)^T, -mu^T f / quantile(eta)];
/// for eta = 0.5 (or zero covariance) it degrades to the halfspace
/// mu^T f(q) <= 0.
ProblemInstance robust_ik_problem(const PlanarArm& arm, const Vector& q0,
                                  const ChanceConstraintSpec& spec);

/// Rewrites every block as a scalar equality on the set's hinged violation
/// residual (constraints-as-equalities form, the no-projection ablation).
ProblemInstance ablation_form(const ProblemInstance& inst);

// ---------------------------------------------------------------------------
// Car motion planning

enum class CarVariant { point, bicycle };

struct CarProblemSpec {
  CarVariant variant = CarVariant::point;
  double wheelbase = 2.7;
  double dt = 0.1;
  int horizon = 60;
  Vector start;  // full state
  Vector goal;   // full state
  double goal_weight = 10.0;
  double effort_weight = 1e-2;
  double velocity_weight = 0.0;  // running weight on non-position states
  std::optional<ConvexPolygon2D> robot;  // vertices about the center; empty = point robot
  std::vector<ConvexPolygon2D> obstacles;
  double control_limit = 4.0;  // acceleration bound
  double steer_limit = 0.6;    // steering bound (bicycle only)
};

/// Reach-a-pose problem with polygonal keep-outs applied to the position at
/// every timestep through the configuration-space (Minkowski) obstacles.
/// Throws if the start position lies inside an inflated obstacle.
ShootingProblem car_obstacle_problem(const CarProblemSpec& spec);

/// The inflated keep-out regions of a car problem (one per obstacle).
std::vector<MinkowskiObstacle2D> car_keepouts(const CarProblemSpec& spec);

// ---------------------------------------------------------------------------
// Arm reach planning (unconstrained optimal control)

struct ReachProblemSpec {
  Vector link_lengths;
  double dt = 0.01;
  int horizon = 40;
  Vector q0;           // start configuration (zero velocity)
  Vec2 target;         // end-effector goal
  double goal_weight = 200.0;
  double effort_weight = 1e-3;
  double velocity_weight = 1e-2;  // terminal weight pulling joints to rest
};

/// Joint-acceleration reach task: quadratic effort plus a terminal
/// end-effector cost (Gauss-Newton quadratization for the Riccati baseline).
ShootingProblem arm_reach_problem(const ReachProblemSpec& spec);

// ---------------------------------------------------------------------------
// Pusher-slider planning

struct PushProblemSpec {
  PusherParams params{};
  double dt = 0.1;
  int horizon = 60;
  Vector start;        // (x, y, theta, contact offset)
  Vector goal_pose;    // (x, y, theta)
  double goal_weight = 100.0;
  double effort_weight = 1e-2;
  double control_limit = 0.15;  // pusher speed bound per axis
};

ShootingProblem push_problem(const PushProblemSpec& spec);

}  // namespace alspg
