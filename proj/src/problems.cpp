#include "alspg/problems.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace alspg {

// ---------------------------------------------------------------------------
// Normal distribution helpers

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

/// Rational approximation of the standard normal quantile (Acklam).
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

}  // namespace

double normal_quantile(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw std::invalid_argument("normal_quantile: eta must lie in (0, 1)");
  }
  double x = quantile_seed(eta);
  for (int i = 0; i < 2; ++i) x -= (normal_cdf(x) - eta) / normal_pdf(x);
  return x;
}

// ---------------------------------------------------------------------------
// Planar arm kinematics

PlanarArm make_planar_arm(Vector link_lengths, double joint_limit) {
  const Index dof = link_lengths.size();
  for (Index i = 0; i < dof; ++i) {
    if (!(link_lengths[i] > 0.0)) {
      throw std::invalid_argument("make_planar_arm: link lengths must be positive");
    }
  }
  PlanarArm arm;
  arm.link_lengths = std::move(link_lengths);
  arm.joint_limits = std::make_shared<BoxSet>(Vector::Constant(dof, -joint_limit),
                                              Vector::Constant(dof, joint_limit));
  return arm;
}

FkResult arm_link_tip(const PlanarArm& arm, const Vector& q, int k) {
  const int dof = arm.dof();
  if (q.size() != dof) throw std::invalid_argument("arm_fk: q dimension mismatch");
  if (k < 1 || k > dof) throw std::invalid_argument("arm_link_tip: link index outside 1..dof");
  FkResult r;
  r.position.setZero();
  r.jacobian = Matrix::Zero(2, dof);
  double angle = 0.0;
  for (int i = 0; i < k; ++i) {
    angle += q[i];
    const double L = arm.link_lengths[i];
    const Vec2 dir(std::cos(angle), std::sin(angle));
    r.position += L * dir;
    const Vec2 perp(-dir.y(), dir.x());
    for (int j = 0; j <= i; ++j) r.jacobian.col(j) += L * perp;
  }
  return r;
}

FkResult arm_fk(const PlanarArm& arm, const Vector& q) { return arm_link_tip(arm, q, arm.dof()); }

FkResult arm_com(const PlanarArm& arm, const Vector& q) {
  const int dof = arm.dof();
  if (q.size() != dof) throw std::invalid_argument("arm_com: q dimension mismatch");
  FkResult r;
  r.position.setZero();
  r.jacobian = Matrix::Zero(2, dof);
  const double total_mass = arm.link_lengths.sum();
  Vec2 base = Vec2::Zero();
  Matrix base_jac = Matrix::Zero(2, dof);
  double angle = 0.0;
  for (int i = 0; i < dof; ++i) {
    angle += q[i];
    const double L = arm.link_lengths[i];
    const Vec2 dir(std::cos(angle), std::sin(angle));
    const Vec2 perp(-dir.y(), dir.x());
    // Midpoint of link i carries mass proportional to its length.
    const double w = L / total_mass;
    r.position += w * (base + 0.5 * L * dir);
    Matrix mid_jac = base_jac;
    for (int j = 0; j <= i; ++j) mid_jac.col(j) += 0.5 * L * perp;
    r.jacobian += w * mid_jac;
    base += L * dir;
    for (int j = 0; j <= i; ++j) base_jac.col(j) += L * perp;
  }
  return r;
}

// ---------------------------------------------------------------------------
// IK problem family

namespace {

ObjectiveOracle distance_to_start_objective(Vector q0) {
  auto value = [q0](const Vector& q) { return (q - q0).squaredNorm(); };
  auto gradient = [q0](const Vector& q) { return Vector(2.0 * (q - q0)); };
  return {std::move(value), std::move(gradient)};
}

std::shared_ptr<const ProjectableSet> domain_or_free(const PlanarArm& arm) {
  if (arm.joint_limits) return arm.joint_limits;
  return std::make_shared<FreeSet>();
}

ConstraintBlock fk_block(const PlanarArm& arm, std::shared_ptr<const ProjectableSet> set,
                         std::string name) {
  ConstraintBlock b;
  b.name = std::move(name);
  b.set = std::move(set);
  b.g = [arm](const Vector& q) { return Vector(to_vector(arm_fk(arm, q).position)); };
  b.jvp_t = [arm](const Vector& q, const Vector& r) {
    return Vector(arm_fk(arm, q).jacobian.transpose() * r);
  };
  return b;
}

}  // namespace

AlspgResult solve_instance(const ProblemInstance& inst, const AlspgConfig& cfg) {
  return alspg_solve(inst.f, *inst.domain, inst.blocks, inst.x0, cfg);
}

ProblemInstance ik_problem(const PlanarArm& arm, const Vector& q0,
                           std::shared_ptr<const ProjectableSet> target_set) {
  if (q0.size() != arm.dof()) throw std::invalid_argument("ik_problem: q0 dimension mismatch");
  ProblemInstance inst{distance_to_start_objective(q0), domain_or_free(arm), {}, q0};
  inst.blocks.push_back(fk_block(arm, std::move(target_set), "ee_target"));
  return inst;
}

ProblemInstance multi_constraint_ik_problem(const PlanarArm& arm, const Vector& q0,
                                            std::shared_ptr<const BoxSet> com_box,
                                            const Vec2& ee_center, double ee_radius,
                                            int anchor_link, const Vec2& anchor_point) {
  ProblemInstance inst{distance_to_start_objective(q0), domain_or_free(arm), {}, q0};

  ConstraintBlock com;
  com.name = "com_box";
  com.set = std::move(com_box);
  com.g = [arm](const Vector& q) { return Vector(to_vector(arm_com(arm, q).position)); };
  com.jvp_t = [arm](const Vector& q, const Vector& r) {
    return Vector(arm_com(arm, q).jacobian.transpose() * r);
  };
  inst.blocks.push_back(std::move(com));

  inst.blocks.push_back(fk_block(
      arm, std::make_shared<QuadricAnnulusSet>(QuadricAnnulusSet::ball(to_vector(ee_center), ee_radius)),
      "ee_disk"));

  ConstraintBlock anchor;
  anchor.name = "anchor";
  anchor.set = std::make_shared<SingletonSet>(to_vector(anchor_point));
  anchor.g = [arm, anchor_link](const Vector& q) {
    return Vector(to_vector(arm_link_tip(arm, q, anchor_link).position));
  };
  anchor.jvp_t = [arm, anchor_link](const Vector& q, const Vector& r) {
    return Vector(arm_link_tip(arm, q, anchor_link).jacobian.transpose() * r);
  };
  inst.blocks.push_back(std::move(anchor));
  return inst;
}

ProblemInstance robust_ik_problem(const PlanarArm& arm, const Vector& q0,
                                  const ChanceConstraintSpec& spec) {
  if (!(spec.eta >= 0.5 && spec.eta < 1.0)) {
    throw std::invalid_argument("robust_ik_problem: eta must lie in [0.5, 1)");
  }
  if (spec.sigma.rows() != 2 || spec.sigma.cols() != 2 || spec.mu.size() != 2) {
    throw std::invalid_argument("robust_ik_problem: expects a 2-D task space");
  }
  if ((spec.sigma - spec.sigma.transpose()).norm() > 1e-9 * (1.0 + spec.sigma.norm())) {
    throw std::invalid_argument("robust_ik_problem: covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.sigma);
  Vector evals = eig.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  for (Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < -1e-12 * scale) {
      throw std::invalid_argument("robust_ik_problem: covariance is not positive semidefinite");
    }
    evals[i] = std::max(evals[i], 0.0);
  }
  const Matrix sigma_sqrt =
      eig.eigenvectors() * evals.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

  ProblemInstance inst{distance_to_start_objective(q0), domain_or_free(arm), {}, q0};
  const double quantile = normal_quantile(spec.eta);

  if (quantile == 0.0 || sigma_sqrt.isZero(0.0)) {
    // The cone collapses to the mean halfspace mu^T f(q) <= 0.
    inst.blocks.push_back(fk_block(
        arm,
        std::make_shared<AffineSlabSet>(spec.mu, -std::numeric_limits<double>::infinity(), 0.0),
        "mean_halfspace"));
    return inst;
  }

  ConstraintBlock cone;
  cone.name = "chance_cone";
  cone.set = std::make_shared<SecondOrderConeSet>();
  const Vector mu = spec.mu;
  cone.g = [arm, sigma_sqrt, mu, quantile](const Vector& q) {
    const Vec2 f = arm_fk(arm, q).position;
    Vector g(3);
    g.head(2) = sigma_sqrt * to_vector(f);
    g[2] = -mu.dot(to_vector(f)) / quantile;
    return g;
  };
  cone.jvp_t = [arm, sigma_sqrt, mu, quantile](const Vector& q, const Vector& r) {
    const Matrix J = arm_fk(arm, q).jacobian;
    const Vector task = sigma_sqrt.transpose() * r.head(2) - mu * (r[2] / quantile);
    return Vector(J.transpose() * task);
  };
  inst.blocks.push_back(std::move(cone));
  return inst;
}

ProblemInstance ablation_form(const ProblemInstance& inst) {
  ProblemInstance out{inst.f, inst.domain, {}, inst.x0};
  const auto zero1 = std::make_shared<SingletonSet>(Vector::Zero(1));
  for (const auto& b : inst.blocks) {
    ConstraintBlock nb;
    nb.name = b.name + "_residual";
    nb.set = zero1;
    const auto g_orig = b.g;
    const auto jvp_orig = b.jvp_t;
    const auto set = b.set;
    nb.g = [g_orig, set](const Vector& x) {
      Vector v(1);
      v[0] = set->violation(g_orig(x), nullptr);
      return v;
    };
    nb.jvp_t = [g_orig, jvp_orig, set](const Vector& x, const Vector& r) {
      Vector vgrad;
      set->violation(g_orig(x), &vgrad);
      return Vector(jvp_orig(x, vgrad) * r[0]);
    };
    out.blocks.push_back(std::move(nb));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Car motion planning

std::vector<MinkowskiObstacle2D> car_keepouts(const CarProblemSpec& spec) {
  std::vector<MinkowskiObstacle2D> keepouts;
  keepouts.reserve(spec.obstacles.size());
  for (const auto& obs : spec.obstacles) {
    keepouts.push_back(spec.robot ? c_obstacle(*spec.robot, obs) : c_obstacle(obs));
  }
  return keepouts;
}

ShootingProblem car_obstacle_problem(const CarProblemSpec& spec) {
  ShootingProblem prob;
  prob.dynamics = spec.variant == CarVariant::point ? car_point(spec.dt)
                                                    : car_bicycle(spec.dt, spec.wheelbase);
  const int m = prob.dynamics.state_dim, n = prob.dynamics.control_dim;
  if (spec.start.size() != m || spec.goal.size() != m) {
    throw std::invalid_argument("car_obstacle_problem: start/goal dimension mismatch");
  }
  prob.x0 = spec.start;
  prob.horizon = spec.horizon;

  Matrix Q = Matrix::Zero(m, m);
  Q(2, 2) = spec.velocity_weight;
  Q(3, 3) = spec.velocity_weight;
  Matrix Qf = spec.goal_weight * Matrix::Identity(m, m);
  Qf(2, 2) *= 0.5;
  Qf(3, 3) *= 0.5;
  prob.cost = std::make_shared<QuadraticStageCost>(
      Q, spec.effort_weight * Matrix::Identity(n, n), Qf, spec.goal, spec.goal);

  Vector lo = Vector::Constant(n, -spec.control_limit);
  Vector hi = Vector::Constant(n, spec.control_limit);
  if (spec.variant == CarVariant::bicycle) {
    lo[0] = -spec.steer_limit;
    hi[0] = spec.steer_limit;
  }
  prob.control_domain = make_control_box(lo, hi, spec.horizon);

  Matrix selector = Matrix::Zero(2, m);
  selector(0, 0) = 1.0;
  selector(1, 1) = 1.0;
  int idx = 0;
  for (auto& keepout : car_keepouts(spec)) {
    if (keepout.polygon().strictly_inside(Vec2(spec.start[0], spec.start[1]), 0.0)) {
      throw std::invalid_argument("car_obstacle_problem: start position inside inflated obstacle " +
                                  std::to_string(idx));
    }
    StateConstraint sc;
    sc.name = "keepout_" + std::to_string(idx++);
    sc.selector = selector;
    sc.set = std::make_shared<MinkowskiObstacle2D>(std::move(keepout));
    prob.state_constraints.push_back(std::move(sc));
  }
  return prob;
}

// ---------------------------------------------------------------------------
// Arm reach planning

namespace {

class ArmReachCost final : public StageCost {
 public:
  ArmReachCost(PlanarArm arm, Vec2 target, double goal_w, double effort_w, double vel_w)
      : arm_(std::move(arm)), target_(target), goal_w_(goal_w), effort_w_(effort_w), vel_w_(vel_w) {}

  double running(int, const Vector&, const Vector& u) const override {
    return 0.5 * effort_w_ * u.squaredNorm();
  }
  void running_gradient(int, const Vector& x, const Vector& u, Vector& gx,
                        Vector& gu) const override {
    gx = Vector::Zero(x.size());
    gu = effort_w_ * u;
  }
  void running_quadratic(int, const Vector& x, const Vector& u, Matrix& Qxx, Matrix& Ruu,
                         Vector& qx, Vector& ru) const override {
    Qxx = Matrix::Zero(x.size(), x.size());
    Ruu = effort_w_ * Matrix::Identity(u.size(), u.size());
    qx = Vector::Zero(x.size());
    ru = effort_w_ * u;
  }
  double terminal(const Vector& x) const override {
    const int dof = arm_.dof();
    const Vec2 err = arm_fk(arm_, x.head(dof)).position - target_;
    return 0.5 * goal_w_ * err.squaredNorm() + 0.5 * vel_w_ * x.tail(dof).squaredNorm();
  }
  void terminal_gradient(const Vector& x, Vector& gx) const override {
    const int dof = arm_.dof();
    const FkResult fk = arm_fk(arm_, x.head(dof));
    gx.setZero(x.size());
    gx.head(dof) = goal_w_ * fk.jacobian.transpose() * (fk.position - target_);
    gx.tail(dof) = vel_w_ * x.tail(dof);
  }
  void terminal_quadratic(const Vector& x, Matrix& Qxx, Vector& qx) const override {
    // Gauss-Newton curvature of the end-effector error.
    const int dof = arm_.dof();
    const FkResult fk = arm_fk(arm_, x.head(dof));
    Qxx = Matrix::Zero(x.size(), x.size());
    Qxx.topLeftCorner(dof, dof) = goal_w_ * fk.jacobian.transpose() * fk.jacobian;
    Qxx.bottomRightCorner(dof, dof) = vel_w_ * Matrix::Identity(dof, dof);
    qx.setZero(x.size());
    qx.head(dof) = goal_w_ * fk.jacobian.transpose() * (fk.position - target_);
    qx.tail(dof) = vel_w_ * x.tail(dof);
  }

 private:
  PlanarArm arm_;
  Vec2 target_;
  double goal_w_, effort_w_, vel_w_;
};

}  // namespace

ShootingProblem arm_reach_problem(const ReachProblemSpec& spec) {
  PlanarArm arm;
  arm.link_lengths = spec.link_lengths;
  const int dof = arm.dof();
  if (spec.q0.size() != dof) {
    throw std::invalid_argument("arm_reach_problem: q0 dimension mismatch");
  }
  ShootingProblem prob;
  prob.dynamics = arm_joint_integrator(dof, spec.dt);
  prob.horizon = spec.horizon;
  prob.x0 = Vector::Zero(2 * dof);
  prob.x0.head(dof) = spec.q0;
  prob.cost = std::make_shared<ArmReachCost>(arm, spec.target, spec.goal_weight,
                                             spec.effort_weight, spec.velocity_weight);
  return prob;
}

// ---------------------------------------------------------------------------
// Pusher-slider planning

ShootingProblem push_problem(const PushProblemSpec& spec) {
  if (spec.start.size() != 4 || spec.goal_pose.size() != 3) {
    throw std::invalid_argument("push_problem: start must be 4-D, goal pose 3-D");
  }
  ShootingProblem prob;
  prob.dynamics = pusher_slider_dynamics(spec.dt, spec.params);
  prob.horizon = spec.horizon;
  prob.x0 = spec.start;

  Matrix Qf = Matrix::Zero(4, 4);
  Qf(0, 0) = Qf(1, 1) = Qf(2, 2) = spec.goal_weight;  // contact offset is free
  Vector goal(4);
  goal.head(3) = spec.goal_pose;
  goal[3] = spec.start[3];
  prob.cost = std::make_shared<QuadraticStageCost>(
      Matrix::Zero(4, 4), spec.effort_weight * Matrix::Identity(2, 2), Qf, goal, goal);

  Vector lo(2), hi(2);
  lo << 0.0, -spec.control_limit;  // a pulling pusher is excluded from the domain
  hi << spec.control_limit, spec.control_limit;
  prob.control_domain = make_control_box(lo, hi, spec.horizon);
  return prob;
}

}  // namespace alspg
