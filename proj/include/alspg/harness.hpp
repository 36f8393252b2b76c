#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alspg/ilqr.hpp"
#include "alspg/problems.hpp"
#include "alspg/scenario.hpp"

namespace alspg::harness {

/// Outcome of one solve: status, timings (wall time around the solve call
/// only) and the oracle tallies that the benchmark tables aggregate.
struct RunRecord {
  std::string scenario_id;
  std::string problem;
  std::string solver;
  std::uint64_t seed = 0;
  std::string status;
  bool converged = false;
  double wall_ms = 0.0;
  long n_f = 0;
  long n_grad = 0;
  long n_jac = 0;
  double final_objective = 0.0;
  double final_max_V = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double domain_violation = 0.0;
  std::string trace_path;
  std::string outer_trace_path;
  std::string solution_path;
  std::string scenario_path;
};

/// Serialization used for record files and the determinism checks; wall time
/// is excluded unless requested.
std::string serialize_record(const RunRecord& rec, bool include_wall);
RunRecord parse_record_file(const std::string& path);

/// A scenario materialized into a solvable problem plus the scene geometry
/// used for plot emission.
struct BuiltProblem {
  std::optional<ProblemInstance> instance;
  std::optional<ShootingProblem> shooting;
  Vector u0;  // initial controls for shooting problems
  std::vector<std::pair<std::string, ConvexPolygon2D>> scene_polygons;
  AlspgConfig alspg_cfg;
  SpgConfig spg_cfg;
  IlqrConfig ilqr_cfg;
};

BuiltProblem build_problem(const Scenario& sc);

/// Executes a scenario `repeat` times (same seed, so records must agree) and
/// writes <out_dir>/<id>.record plus trace/solution CSVs. Returns one record
/// per repeat.
std::vector<RunRecord> run_scenario(const Scenario& sc, const std::string& out_dir);

struct SuiteRow {
  std::string problem;
  std::string solver;
  int count = 0;
  int converged = 0;
  double wall_mean = 0.0, wall_std = 0.0;
  double n_f_mean = 0.0, n_f_std = 0.0;
  double n_grad_mean = 0.0, n_grad_std = 0.0;
  double n_jac_mean = 0.0, n_jac_std = 0.0;
  double objective_mean = 0.0, objective_std = 0.0;
};

struct SuiteResult {
  std::vector<RunRecord> records;
  std::vector<SuiteRow> rows;  // aggregated per (problem, solver)
  int failures = 0;
};

/// Runs every *.scenario under `dir` whose id matches `filter` (ECMAScript
/// regex, empty = all), optionally across parallel workers; results merge in
/// scenario-id order.
SuiteResult run_suite(const std::string& dir, const std::string& filter,
                      const std::string& out_dir, int jobs = 1,
                      std::optional<std::uint64_t> seed_override = {});

std::vector<SuiteRow> aggregate_records(const std::vector<RunRecord>& records);
void write_suite_csv(const std::vector<SuiteRow>& rows, const std::string& path);
std::string format_suite_table(const std::vector<SuiteRow>& rows);

enum class PlotKind { convergence, trajectory, geometry };

/// Derives plot data from a record: convergence (iter, cost, stationarity),
/// trajectory (t, state..., control...) or scene geometry in the scenario
/// key-value grammar. Returns the written path.
std::string emit_plotdata(const std::string& record_path, PlotKind kind,
                          const std::string& out_dir);

}  // namespace alspg::harness
