#include "alspg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#include "alspg/rng.hpp"

namespace alspg::harness {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

SpgConfig read_spg_config(const KeyValueFile& f) {
  SpgConfig cfg;
  cfg.tol = f.get_double("spg", "tol", cfg.tol);
  cfg.max_iter = f.get_int("spg", "max_iter", cfg.max_iter);
  cfg.gamma_small = f.get_double("spg", "gamma_small", cfg.gamma_small);
  cfg.line_search.memory = f.get_int("spg", "memory", cfg.line_search.memory);
  cfg.line_search.beta = f.get_double("spg", "beta", cfg.line_search.beta);
  cfg.line_search.max_backtracks =
      f.get_int("spg", "max_backtracks", cfg.line_search.max_backtracks);
  return cfg;
}

AlspgConfig read_alspg_config(const KeyValueFile& f) {
  AlspgConfig cfg;
  cfg.inner = read_spg_config(f);
  cfg.rho0 = f.get_double("alspg", "rho0", cfg.rho0);
  cfg.outer_tol = f.get_double("alspg", "outer_tol", cfg.outer_tol);
  cfg.penalty_growth = f.get_double("alspg", "penalty_growth", cfg.penalty_growth);
  cfg.max_outer = f.get_int("alspg", "max_outer", cfg.max_outer);
  cfg.inner_tol_schedule = f.get_bool("alspg", "inner_tol_schedule", cfg.inner_tol_schedule);
  cfg.inner_tol_start = f.get_double("alspg", "inner_tol_start", cfg.inner_tol_start);
  cfg.lambda_clip = f.get_double("alspg", "lambda_clip", cfg.lambda_clip);
  return cfg;
}

IlqrConfig read_ilqr_config(const KeyValueFile& f) {
  IlqrConfig cfg;
  cfg.max_iter = f.get_int("ilqr", "max_iter", cfg.max_iter);
  cfg.tol = f.get_double("ilqr", "tol", cfg.tol);
  cfg.reg_init = f.get_double("ilqr", "reg_init", cfg.reg_init);
  cfg.reg_max = f.get_double("ilqr", "reg_max", cfg.reg_max);
  cfg.max_backtracks = f.get_int("ilqr", "max_backtracks", cfg.max_backtracks);
  return cfg;
}

PlanarArm read_arm(const Scenario& sc, Rng& rng, Vector& q0) {
  Vector links(3);
  links << 1.0, 1.0, 1.0;
  links = sc.file.get_vector("arm", "links", links);
  const double limit = sc.file.get_double("arm", "joint_limit", M_PI);
  PlanarArm arm = make_planar_arm(links, limit);
  const std::string q0_raw = sc.file.get_string("arm", "q0", "zeros");
  if (q0_raw == "random") {
    q0 = rng.uniform_vector(arm.dof(), -limit, limit);
  } else if (q0_raw == "zeros") {
    q0 = Vector::Zero(arm.dof());
  } else {
    q0 = sc.file.get_vector("arm", "q0");
  }
  if (q0.size() != arm.dof()) throw ParseError(sc.source_path + ": q0 dimension mismatch");
  return arm;
}

std::shared_ptr<const ProjectableSet> read_target(const Scenario& sc) {
  const std::string kind = sc.file.get_string("target", "kind");
  if (kind == "point") {
    return std::make_shared<SingletonSet>(sc.file.get_vector("target", "point"));
  }
  if (kind == "halfspace") {
    const Vector normal = sc.file.get_vector("target", "normal");
    const double offset = sc.file.get_double("target", "offset", 0.0);
    return std::make_shared<AffineSlabSet>(normal, -std::numeric_limits<double>::infinity(),
                                           offset);
  }
  if (kind == "annulus") {
    const Vector center = sc.file.get_vector("target", "center");
    const double r_inner = sc.file.get_double("target", "r_inner", 0.0);
    const double r_outer = sc.file.get_double("target", "r_outer");
    return std::make_shared<QuadricAnnulusSet>(
        QuadricAnnulusSet::shell(center, r_inner, r_outer));
  }
  if (kind == "box") {
    const Vector center = sc.file.get_vector("target", "center");
    const Vector half = sc.file.get_vector("target", "half");
    return std::make_shared<BoxSet>(center - half, center + half);
  }
  throw ParseError(sc.source_path + ": unknown target kind '" + kind + "'");
}

ConvexPolygon2D random_rectangle(Rng& rng, double cx_lo, double cx_hi, double cy_lo, double cy_hi,
                                 double half_lo, double half_hi) {
  const Vec2 center(rng.uniform(cx_lo, cx_hi), rng.uniform(cy_lo, cy_hi));
  const double hx = rng.uniform(half_lo, half_hi);
  const double hy = rng.uniform(half_lo, half_hi);
  const double rot = rng.uniform(0.0, M_PI);
  return ConvexPolygon2D::rectangle(center, hx, hy, rot);
}

void build_car(const Scenario& sc, BuiltProblem& out) {
  CarProblemSpec spec;
  const std::string variant = sc.file.get_string("car", "variant", "point");
  if (variant == "point") {
    spec.variant = CarVariant::point;
  } else if (variant == "bicycle") {
    spec.variant = CarVariant::bicycle;
  } else {
    throw ParseError(sc.source_path + ": unknown car variant '" + variant + "'");
  }
  spec.wheelbase = sc.file.get_double("car", "wheelbase", spec.wheelbase);
  spec.dt = sc.file.get_double("car", "dt", spec.dt);
  spec.horizon = sc.file.get_int("car", "T", spec.horizon);
  Vector start4(4), goal4(4);
  start4 << -4.0, 0.0, 0.0, 0.0;
  goal4 << 4.0, 0.0, 0.0, 0.0;
  spec.start = sc.file.get_vector("car", "start", start4);
  spec.goal = sc.file.get_vector("car", "goal", goal4);
  spec.goal_weight = sc.file.get_double("car", "goal_weight", spec.goal_weight);
  spec.effort_weight = sc.file.get_double("car", "effort_weight", spec.effort_weight);
  spec.velocity_weight = sc.file.get_double("car", "velocity_weight", spec.velocity_weight);
  spec.control_limit = sc.file.get_double("car", "control_limit", spec.control_limit);
  spec.steer_limit = sc.file.get_double("car", "steer_limit", spec.steer_limit);

  if (sc.file.has("robot", "half")) {
    const Vector half = sc.file.get_vector("robot", "half");
    spec.robot = ConvexPolygon2D::rectangle(Vec2::Zero(), half[0], half[1]);
    out.scene_polygons.emplace_back("robot", *spec.robot);
  }

  // Explicit obstacles win; otherwise the seed generates a scene.
  int explicit_count = 0;
  for (const auto& name : sc.file.section_names()) {
    if (name.rfind("obstacle.", 0) == 0) {
      const Vector center = sc.file.get_vector(name, "center");
      const Vector half = sc.file.get_vector(name, "half");
      const double rot = sc.file.get_double(name, "rotation", 0.0);
      spec.obstacles.push_back(
          ConvexPolygon2D::rectangle(Vec2(center[0], center[1]), half[0], half[1], rot));
      ++explicit_count;
    }
  }
  if (explicit_count == 0) {
    Rng rng(sc.seed);
    const int count = sc.file.get_int("scene", "obstacles", 4);
    const double margin = sc.file.get_double("scene", "clearance", 0.35);
    const Vec2 start_pos(spec.start[0], spec.start[1]);
    const Vec2 goal_pos(spec.goal[0], spec.goal[1]);
    for (int i = 0; i < count; ++i) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        ConvexPolygon2D rect = random_rectangle(rng, -2.2, 2.2, -1.8, 1.8, 0.35, 0.9);
        MinkowskiObstacle2D keep =
            spec.robot ? c_obstacle(*spec.robot, rect) : c_obstacle(rect);
        const auto clear = [&](const Vec2& p) {
          return !keep.polygon().contains_point(p, margin);
        };
        if (clear(start_pos) && clear(goal_pos)) {
          spec.obstacles.push_back(std::move(rect));
          break;
        }
      }
    }
  }
  int idx = 0;
  for (const auto& obs : spec.obstacles) {
    out.scene_polygons.emplace_back("obstacle_" + std::to_string(idx++), obs);
  }
  idx = 0;
  for (const auto& keep : car_keepouts(spec)) {
    out.scene_polygons.emplace_back("keepout_" + std::to_string(idx++), keep.polygon());
  }
  out.shooting = car_obstacle_problem(spec);
  out.u0 = Vector::Zero(out.shooting->control_size());
}

void build_push(const Scenario& sc, BuiltProblem& out) {
  PushProblemSpec spec;
  spec.dt = sc.file.get_double("push", "dt", spec.dt);
  spec.horizon = sc.file.get_int("push", "T", spec.horizon);
  spec.goal_weight = sc.file.get_double("push", "goal_weight", spec.goal_weight);
  spec.effort_weight = sc.file.get_double("push", "effort_weight", spec.effort_weight);
  spec.control_limit = sc.file.get_double("push", "control_limit", spec.control_limit);
  spec.params.half_length = sc.file.get_double("push", "half_length", spec.params.half_length);
  spec.params.half_width = sc.file.get_double("push", "half_width", spec.params.half_width);
  spec.params.ls_ratio = sc.file.get_double("push", "ls_ratio", spec.params.ls_ratio);
  Vector start4 = Vector::Zero(4);
  spec.start = sc.file.get_vector("push", "start", start4);

  const std::string goal_raw = sc.file.get_string("push", "goal", "random");
  if (goal_raw == "random") {
    Rng rng(sc.seed);
    Vector goal(3);
    const double r = rng.uniform(0.06, 0.14);
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    goal[0] = r * std::cos(ang);
    goal[1] = r * std::sin(ang);
    goal[2] = rng.uniform(-2.0 * M_PI / 3.0, 2.0 * M_PI / 3.0);
    spec.goal_pose = goal;
  } else {
    spec.goal_pose = sc.file.get_vector("push", "goal");
  }

  out.shooting = push_problem(spec);
  if (sc.solver == "ilqr") {
    out.shooting->control_domain.reset();  // the Riccati baseline is unconstrained
  }
  out.u0 = Vector::Zero(out.shooting->control_size());
}

void build_reach(const Scenario& sc, BuiltProblem& out) {
  ReachProblemSpec spec;
  Vector links(3);
  links << 0.5, 0.4, 0.3;
  spec.link_lengths = sc.file.get_vector("reach", "links", links);
  spec.dt = sc.file.get_double("reach", "dt", spec.dt);
  spec.horizon = sc.file.get_int("reach", "T", spec.horizon);
  spec.q0 = sc.file.get_vector("reach", "q0", Vector::Zero(spec.link_lengths.size()));
  spec.goal_weight = sc.file.get_double("reach", "goal_weight", spec.goal_weight);
  spec.effort_weight = sc.file.get_double("reach", "effort_weight", spec.effort_weight);
  spec.velocity_weight = sc.file.get_double("reach", "velocity_weight", spec.velocity_weight);

  const std::string target_raw = sc.file.get_string("reach", "target", "random");
  if (target_raw == "random") {
    Rng rng(sc.seed);
    const double reach = spec.link_lengths.sum();
    const double r = rng.uniform(0.35, 0.85) * reach;
    const double ang = rng.uniform(-M_PI, M_PI);
    spec.target = Vec2(r * std::cos(ang), r * std::sin(ang));
  } else {
    const Vector t = sc.file.get_vector("reach", "target");
    spec.target = Vec2(t[0], t[1]);
  }
  out.shooting = arm_reach_problem(spec);
  out.u0 = Vector::Zero(out.shooting->control_size());
}

}  // namespace

BuiltProblem build_problem(const Scenario& sc) {
  BuiltProblem out;
  out.spg_cfg = read_spg_config(sc.file);
  out.alspg_cfg = read_alspg_config(sc.file);
  out.ilqr_cfg = read_ilqr_config(sc.file);

  Rng rng(sc.seed);
  if (sc.problem == "ik") {
    Vector q0;
    const PlanarArm arm = read_arm(sc, rng, q0);
    out.instance = ik_problem(arm, q0, read_target(sc));
  } else if (sc.problem == "ik_multi") {
    Vector q0;
    Vector links(5);
    links << 0.6, 0.55, 0.5, 0.45, 0.4;
    Scenario sc_arm = sc;
    if (!sc.file.has("arm", "links")) sc_arm.file.set_vector("arm", "links", links);
    const PlanarArm arm = read_arm(sc_arm, rng, q0);
    Vector com_center(2), com_half(2);
    com_center << 0.35, 0.35;
    com_half << 0.25, 0.35;
    com_center = sc.file.get_vector("com_box", "center", com_center);
    com_half = sc.file.get_vector("com_box", "half", com_half);
    auto com_box = std::make_shared<BoxSet>(com_center - com_half, com_center + com_half);
    Vector ee_center(2);
    ee_center << 1.2, 1.0;
    ee_center = sc.file.get_vector("ee_disk", "center", ee_center);
    const double ee_radius = sc.file.get_double("ee_disk", "radius", 0.25);
    const int anchor_link = sc.file.get_int("anchor", "link", 2);
    Vector anchor_pt(2);
    anchor_pt << 0.7, 0.75;
    anchor_pt = sc.file.get_vector("anchor", "point", anchor_pt);
    out.instance = multi_constraint_ik_problem(arm, q0, com_box, Vec2(ee_center[0], ee_center[1]),
                                               ee_radius, anchor_link,
                                               Vec2(anchor_pt[0], anchor_pt[1]));
  } else if (sc.problem == "robust_ik") {
    Vector q0;
    const PlanarArm arm = read_arm(sc, rng, q0);
    ChanceConstraintSpec spec;
    Vector mu(2);
    mu << 0.0, 1.0;
    spec.mu = sc.file.get_vector("chance", "mu", mu);
    Vector sig(3);
    sig << 0.04, 0.0, 0.04;
    sig = sc.file.get_vector("chance", "sigma", sig);
    spec.sigma = Matrix(2, 2);
    spec.sigma << sig[0], sig[1], sig[1], sig[2];
    spec.eta = sc.file.get_double("chance", "eta", 0.8);
    out.instance = robust_ik_problem(arm, q0, spec);
  } else if (sc.problem == "car") {
    build_car(sc, out);
  } else if (sc.problem == "push") {
    build_push(sc, out);
  } else if (sc.problem == "reach") {
    build_reach(sc, out);
  } else {
    throw ParseError(sc.source_path + ": unknown problem id '" + sc.problem + "'");
  }
  return out;
}

namespace {

double domain_violation_of(const ProjectableSet& domain, const Vector& x) {
  return (x - domain.project(x)).lpNorm<Eigen::Infinity>();
}

void write_solution_csv(const std::string& path, const DynamicsModel& dyn, const Vector& x0,
                        const Vector& x, const Vector& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int m = dyn.state_dim, n = dyn.control_dim;
  const int T = static_cast<int>(u.size() / n);
  out << "t";
  for (int i = 0; i < m; ++i) out << ",x" << i;
  for (int i = 0; i < n; ++i) out << ",u" << i;
  out << '\n';
  out.precision(17);
  for (int t = 0; t <= T; ++t) {
    out << t;
    const Vector xt = t == 0 ? x0 : Vector(x.segment(traj_index(t - 1, m), m));
    for (int i = 0; i < m; ++i) out << ',' << xt[i];
    for (int i = 0; i < n; ++i) out << ',' << (t < T ? u[traj_index(t, n) + i] : 0.0);
    out << '\n';
  }
}

void write_point_csv(const std::string& path, const Vector& x) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t";
  for (Index i = 0; i < x.size(); ++i) out << ",x" << i;
  out << "\n0";
  out.precision(17);
  for (Index i = 0; i < x.size(); ++i) out << ',' << x[i];
  out << '\n';
}

RunRecord execute(const Scenario& sc, const BuiltProblem& built, const std::string& out_dir,
                  bool write_files) {
  RunRecord rec;
  rec.scenario_id = sc.id;
  rec.problem = sc.problem;
  rec.solver = sc.solver;
  rec.seed = sc.seed;
  rec.scenario_path = sc.source_path;

  const std::string base = join(out_dir, sc.id);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<SpgHistoryRow> history;
  std::vector<AlspgOuterRow> outer_trace;
  Vector solution;

  if (built.instance) {
    const ProblemInstance& inst = *built.instance;
    if (sc.solver == "alspg" || sc.solver == "alspg-noproj") {
      const ProblemInstance solved =
          sc.solver == "alspg-noproj" ? ablation_form(inst) : inst;
      const AlspgResult r = solve_instance(solved, built.alspg_cfg);
      rec.status = to_string(r.status);
      rec.converged = r.status == AlspgStatus::converged;
      rec.n_f = r.n_value_calls;
      rec.n_grad = r.n_gradient_calls;
      rec.n_jac = r.n_jvp_calls;
      rec.final_objective = r.f_star;
      rec.final_max_V = r.max_V;
      rec.outer_iterations = r.outer_iterations;
      rec.inner_iterations = r.total_inner_iterations;
      rec.domain_violation = domain_violation_of(*inst.domain, r.x_star);
      history = r.inner_history;
      outer_trace = r.outer_trace;
      solution = r.x_star;
    } else if (sc.solver == "spg" && inst.blocks.empty()) {
      const SpgResult r = spg_minimize(inst.f, *inst.domain, inst.x0, built.spg_cfg);
      rec.status = to_string(r.status);
      rec.converged = r.status == SpgStatus::converged;
      rec.n_f = r.n_value_calls;
      rec.n_grad = r.n_gradient_calls;
      rec.final_objective = r.f_star;
      rec.inner_iterations = r.iterations;
      rec.domain_violation = domain_violation_of(*inst.domain, r.x_star);
      history = r.history;
      solution = r.x_star;
    } else {
      throw ParseError(sc.source_path + ": solver '" + sc.solver +
                       "' cannot run problem '" + sc.problem + "'");
    }
  } else {
    const ShootingProblem& prob = *built.shooting;
    const FreeSet free_domain;
    const ProjectableSet& domain =
        prob.control_domain ? *prob.control_domain : static_cast<const ProjectableSet&>(free_domain);
    if (sc.solver == "alspg" || sc.solver == "alspg-noproj" || sc.solver == "spg") {
      if (sc.solver == "spg" && !prob.state_constraints.empty()) {
        throw ParseError(sc.source_path + ": solver 'spg' needs an unconstrained problem");
      }
      AlspgResult r;
      if (sc.solver == "alspg-noproj") {
        auto cache = std::make_shared<RolloutCache>();
        const ObjectiveOracle oracle = make_reduced_oracle(prob, cache);
        ProblemInstance tmp{oracle, prob.control_domain
                                        ? prob.control_domain
                                        : std::make_shared<const FreeSet>(),
                            make_state_blocks(prob, cache), built.u0};
        r = solve_instance(ablation_form(tmp), built.alspg_cfg);
      } else {
        r = solve_ocp(prob, built.u0, built.alspg_cfg);
      }
      rec.status = to_string(r.status);
      rec.converged = r.status == AlspgStatus::converged;
      rec.n_f = r.n_value_calls;
      rec.n_grad = r.n_gradient_calls;
      rec.n_jac = r.n_jvp_calls;
      rec.final_objective = r.f_star;
      rec.final_max_V = r.max_V;
      rec.outer_iterations = r.outer_iterations;
      rec.inner_iterations = r.total_inner_iterations;
      rec.domain_violation = domain_violation_of(domain, r.x_star);
      history = r.inner_history;
      outer_trace = r.outer_trace;
      solution = r.x_star;
    } else if (sc.solver == "ilqr") {
      const SpgResult r = ilqr_baseline(prob, built.u0, built.ilqr_cfg);
      rec.status = to_string(r.status);
      rec.converged = r.status == SpgStatus::converged;
      rec.n_f = r.n_value_calls;
      rec.n_grad = r.n_gradient_calls;
      rec.n_jac = r.n_jvp_calls;
      rec.final_objective = r.f_star;
      rec.inner_iterations = r.iterations;
      history = r.history;
      solution = r.x_star;
    } else {
      throw ParseError(sc.source_path + ": unknown solver '" + sc.solver + "'");
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  rec.trace_path = base + ".trace.csv";
  rec.solution_path = base + ".solution.csv";
  if (!outer_trace.empty()) rec.outer_trace_path = base + ".outer.csv";
  if (write_files) {
    write_history_csv(history, rec.trace_path);
    if (!outer_trace.empty()) write_outer_trace_csv(outer_trace, rec.outer_trace_path);
    if (built.shooting) {
      const Vector x = rollout(built.shooting->dynamics, built.shooting->x0, solution);
      write_solution_csv(rec.solution_path, built.shooting->dynamics, built.shooting->x0, x,
                         solution);
    } else {
      write_point_csv(rec.solution_path, solution);
    }
    std::ofstream out(base + ".record");
    out << serialize_record(rec, true);
  }
  return rec;
}

}  // namespace

std::string serialize_record(const RunRecord& rec, bool include_wall) {
  std::ostringstream out;
  out.precision(17);
  out << "id = " << rec.scenario_id << '\n'
      << "problem = " << rec.problem << '\n'
      << "solver = " << rec.solver << '\n'
      << "seed = " << rec.seed << '\n'
      << "status = " << rec.status << '\n'
      << "converged = " << (rec.converged ? 1 : 0) << '\n';
  if (include_wall) out << "wall_ms = " << rec.wall_ms << '\n';
  out << "n_f = " << rec.n_f << '\n'
      << "n_grad = " << rec.n_grad << '\n'
      << "n_jac = " << rec.n_jac << '\n'
      << "final_objective = " << rec.final_objective << '\n'
      << "final_max_V = " << rec.final_max_V << '\n'
      << "outer_iterations = " << rec.outer_iterations << '\n'
      << "inner_iterations = " << rec.inner_iterations << '\n'
      << "domain_violation = " << rec.domain_violation << '\n'
      << "trace = " << rec.trace_path << '\n'
      << "outer_trace = " << rec.outer_trace_path << '\n'
      << "solution = " << rec.solution_path << '\n'
      << "scenario = " << rec.scenario_path << '\n';
  return out.str();
}

RunRecord parse_record_file(const std::string& path) {
  const KeyValueFile f = KeyValueFile::parse_file(path);
  RunRecord rec;
  rec.scenario_id = f.get_string("", "id");
  rec.problem = f.get_string("", "problem");
  rec.solver = f.get_string("", "solver");
  rec.seed = static_cast<std::uint64_t>(f.get_int("", "seed"));
  rec.status = f.get_string("", "status");
  rec.converged = f.get_int("", "converged") != 0;
  rec.wall_ms = f.get_double("", "wall_ms", 0.0);
  rec.n_f = f.get_int("", "n_f");
  rec.n_grad = f.get_int("", "n_grad");
  rec.n_jac = f.get_int("", "n_jac");
  rec.final_objective = f.get_double("", "final_objective");
  rec.final_max_V = f.get_double("", "final_max_V");
  rec.outer_iterations = f.get_int("", "outer_iterations");
  rec.inner_iterations = f.get_int("", "inner_iterations");
  rec.domain_violation = f.get_double("", "domain_violation");
  rec.trace_path = f.get_string("", "trace", "");
  rec.outer_trace_path = f.get_string("", "outer_trace", "");
  rec.solution_path = f.get_string("", "solution", "");
  rec.scenario_path = f.get_string("", "scenario", "");
  return rec;
}

std::vector<RunRecord> run_scenario(const Scenario& sc, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<RunRecord> records;
  for (int i = 0; i < sc.repeat; ++i) {
    const BuiltProblem built = build_problem(sc);
    records.push_back(execute(sc, built, out_dir, i == 0));
  }
  return records;
}

std::vector<SuiteRow> aggregate_records(const std::vector<RunRecord>& records) {
  std::vector<SuiteRow> rows;
  const auto row_for = [&rows](const std::string& problem,
                               const std::string& solver) -> SuiteRow& {
    for (auto& r : rows) {
      if (r.problem == problem && r.solver == solver) return r;
    }
    rows.push_back({});
    rows.back().problem = problem;
    rows.back().solver = solver;
    return rows.back();
  };

  struct Acc {
    std::vector<double> wall, nf, ng, nj, obj;
  };
  std::vector<Acc> accs;
  for (const auto& rec : records) {
    SuiteRow& row = row_for(rec.problem, rec.solver);
    const size_t idx = static_cast<size_t>(&row - rows.data());
    if (accs.size() <= idx) accs.resize(rows.size());
    Acc& a = accs[idx];
    a.wall.push_back(rec.wall_ms);
    a.nf.push_back(static_cast<double>(rec.n_f));
    a.ng.push_back(static_cast<double>(rec.n_grad));
    a.nj.push_back(static_cast<double>(rec.n_jac));
    a.obj.push_back(rec.final_objective);
    ++row.count;
    if (rec.converged) ++row.converged;
  }
  const auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    sd = 0.0;
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    mean_std(accs[i].wall, rows[i].wall_mean, rows[i].wall_std);
    mean_std(accs[i].nf, rows[i].n_f_mean, rows[i].n_f_std);
    mean_std(accs[i].ng, rows[i].n_grad_mean, rows[i].n_grad_std);
    mean_std(accs[i].nj, rows[i].n_jac_mean, rows[i].n_jac_std);
    mean_std(accs[i].obj, rows[i].objective_mean, rows[i].objective_std);
  }
  return rows;
}

SuiteResult run_suite(const std::string& dir, const std::string& filter,
                      const std::string& out_dir, int jobs,
                      std::optional<std::uint64_t> seed_override) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".scenario") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());

  std::vector<Scenario> scenarios;
  const std::regex re(filter.empty() ? ".*" : filter);
  for (const auto& p : paths) {
    Scenario sc = load_scenario(p, seed_override);
    if (std::regex_search(sc.id, re)) scenarios.push_back(std::move(sc));
  }
  if (scenarios.empty()) throw ParseError("no scenario matches filter '" + filter + "'");

  fs::create_directories(out_dir);
  SuiteResult result;
  std::vector<std::vector<RunRecord>> slots(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  std::atomic<size_t> next{0};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  const auto work = [&] {
    for (size_t i = next.fetch_add(1); i < scenarios.size(); i = next.fetch_add(1)) {
      try {
        slots[i] = run_scenario(scenarios[i], out_dir);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (size_t i = 0; i < scenarios.size(); ++i) {
    if (!errors[i].empty()) throw ParseError(scenarios[i].source_path + ": " + errors[i]);
    for (auto& rec : slots[i]) {
      if (!rec.converged) ++result.failures;
      result.records.push_back(std::move(rec));
    }
  }
  result.rows = aggregate_records(result.records);
  return result;
}

void write_suite_csv(const std::vector<SuiteRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "problem,solver,count,converged,wall_ms_mean,wall_ms_std,n_f_mean,n_f_std,"
         "n_grad_mean,n_grad_std,n_jac_mean,n_jac_std,objective_mean,objective_std\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.problem << ',' << r.solver << ',' << r.count << ',' << r.converged << ','
        << r.wall_mean << ',' << r.wall_std << ',' << r.n_f_mean << ',' << r.n_f_std << ','
        << r.n_grad_mean << ',' << r.n_grad_std << ',' << r.n_jac_mean << ',' << r.n_jac_std
        << ',' << r.objective_mean << ',' << r.objective_std << '\n';
  }
}

std::string format_suite_table(const std::vector<SuiteRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "problem" << std::setw(14) << "solver" << std::right
      << std::setw(6) << "runs" << std::setw(6) << "conv" << std::setw(10) << "time[ms]"
      << std::setw(9) << "+-" << std::setw(11) << "n_f" << std::setw(10) << "+-"
      << std::setw(11) << "n_jac" << std::setw(10) << "+-" << std::setw(13) << "objective"
      << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r.problem << std::setw(14) << r.solver << std::right
        << std::setw(6) << r.count << std::setw(6) << r.converged << std::setw(10) << std::fixed
        << std::setprecision(1) << r.wall_mean << std::setw(9) << r.wall_std << std::setw(11)
        << r.n_f_mean << std::setw(10) << r.n_f_std << std::setw(11) << r.n_jac_mean
        << std::setw(10) << r.n_jac_std << std::setw(13) << std::setprecision(5)
        << r.objective_mean << '\n';
  }
  return out.str();
}

std::string emit_plotdata(const std::string& record_path, PlotKind kind,
                          const std::string& out_dir) {
  const RunRecord rec = parse_record_file(record_path);
  fs::create_directories(out_dir);
  const std::string base = join(out_dir, rec.scenario_id);

  if (kind == PlotKind::convergence) {
    if (rec.trace_path.empty() || !fs::exists(rec.trace_path)) {
      throw std::runtime_error("record has no iteration history: " + record_path);
    }
    std::ifstream in(rec.trace_path);
    std::string line;
    std::getline(in, line);  // header
    const std::string path = base + ".convergence.csv";
    std::ofstream out(path);
    out << "iter,cost,stationarity\n";
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string iter, f, st;
      std::getline(row, iter, ',');
      std::getline(row, f, ',');
      std::getline(row, st, ',');
      out << iter << ',' << f << ',' << st << '\n';
    }
    return path;
  }

  if (kind == PlotKind::trajectory) {
    if (rec.solution_path.empty() || !fs::exists(rec.solution_path)) {
      throw std::runtime_error("record has no solution trajectory: " + record_path);
    }
    const std::string path = base + ".trajectory.csv";
    fs::copy_file(rec.solution_path, path, fs::copy_options::overwrite_existing);
    return path;
  }

  // Scene geometry, re-derived from the scenario so the output stays in the
  // scenario grammar (parse-emit-parse fixpoint).
  if (rec.scenario_path.empty() || !fs::exists(rec.scenario_path)) {
    throw std::runtime_error("record does not reference its scenario: " + record_path);
  }
  const Scenario sc = load_scenario(rec.scenario_path);
  const BuiltProblem built = build_problem(sc);
  KeyValueFile geo;
  geo.set("", "id", rec.scenario_id);
  for (const auto& [name, poly] : built.scene_polygons) {
    Vector flat(2 * poly.size());
    for (int i = 0; i < poly.size(); ++i) {
      flat[2 * i] = poly.vertices()[i].x();
      flat[2 * i + 1] = poly.vertices()[i].y();
    }
    geo.set_vector("geometry." + name, "vertices", flat);
  }
  const std::string path = base + ".geometry.kv";
  geo.write_file(path);
  return path;
}

}  // namespace alspg::harness
