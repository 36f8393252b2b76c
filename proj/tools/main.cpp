#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "alspg/harness.hpp"
#include "alspg/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitUsage = 2;

void print_record(const alspg::harness::RunRecord& rec) {
  std::cout << rec.scenario_id << ": " << rec.status << "  f=" << rec.final_objective
            << "  max_V=" << rec.final_max_V << "  n_f=" << rec.n_f << "  n_grad=" << rec.n_grad
            << "  n_jac=" << rec.n_jac << "  wall=" << rec.wall_ms << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-based constrained optimization benchmark harness"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  app.add_option("--out", out_dir, "Output directory for records and traces");
  app.add_option("--seed", seed_override, "Override the scenario seed");

  std::string run_path;
  CLI::App* run = app.add_subcommand("run", "Run a single scenario file");
  run->add_option("file", run_path, "Scenario file")->required();

  std::string suite_dir;
  std::string filter;
  int jobs = 1;
  CLI::App* suite = app.add_subcommand("suite", "Run every scenario in a directory");
  suite->add_option("dir", suite_dir, "Directory of *.scenario files")->required();
  suite->add_option("--filter", filter, "Regular expression on scenario ids");
  suite->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

  std::string record_path;
  std::string kind = "convergence";
  CLI::App* plot = app.add_subcommand("plot", "Emit plot data from a run record");
  plot->add_option("record", record_path, "Record file written by run")->required();
  plot->add_option("--kind", kind, "convergence | trajectory | geometry")
      ->check(CLI::IsMember({"convergence", "trajectory", "geometry"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      const alspg::harness::Scenario sc = alspg::harness::load_scenario(run_path, seed_override);
      const auto records = alspg::harness::run_scenario(sc, out_dir);
      bool all_ok = true;
      for (const auto& rec : records) {
        print_record(rec);
        all_ok = all_ok && rec.converged;
      }
      return all_ok ? kExitOk : kExitSolverFailure;
    }
    if (suite->parsed()) {
      const auto result = alspg::harness::run_suite(suite_dir, filter, out_dir, jobs, seed_override);
      alspg::harness::write_suite_csv(result.rows, out_dir + "/summary.csv");
      std::cout << alspg::harness::format_suite_table(result.rows);
      std::cout << "records: " << result.records.size() << ", failures: " << result.failures
                << ", summary: " << out_dir << "/summary.csv\n";
      return result.failures == 0 ? kExitOk : kExitSolverFailure;
    }
    if (plot->parsed()) {
      alspg::harness::PlotKind pk = alspg::harness::PlotKind::convergence;
      if (kind == "trajectory") pk = alspg::harness::PlotKind::trajectory;
      if (kind == "geometry") pk = alspg::harness::PlotKind::geometry;
      const std::string path = alspg::harness::emit_plotdata(record_path, pk, out_dir);
      std::cout << path << '\n';
      return kExitOk;
    }
  } catch (const alspg::harness::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitUsage;
}
