// Command-line front end. Talks to the toolkit exclusively through the C
// interface in hems.h, the same surface any other binding gets.
//
// Results go to stdout; diagnostics go to stderr at a verbosity picked by
// HEMS_LOG (error, info, debug; default info). Exit codes are listed in
// the --help footer and kept disjoint per failure class so scripts can
// branch on them.

#include <hems.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

namespace {

int g_verbosity = 1;  // 0 error, 1 info, 2 debug

void read_verbosity_from_env() {
  const char* env = std::getenv("HEMS_LOG");
  if (!env) return;
  if (std::strcmp(env, "error") == 0) g_verbosity = 0;
  else if (std::strcmp(env, "debug") == 0) g_verbosity = 2;
  else g_verbosity = 1;  // anything else means the default
}

void note(int level, const std::string& msg) {
  if (g_verbosity >= level) std::fprintf(stderr, "hems: %s\n", msg.c_str());
}

// Same 12-significant-digit convention the output bundle uses.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int exit_code_for(hems_status status) {
  switch (status) {
    case HEMS_OK: return 0;
    case HEMS_ERR_SOLVER: return 2;
    case HEMS_ERR_ARGUMENT:
    case HEMS_ERR_CONFIG:
    case HEMS_ERR_IO: return 3;
    case HEMS_ERR_INFEASIBLE: return 5;
    case HEMS_ERR_PRECONDITION:
    case HEMS_ERR_INTERNAL: return 6;
  }
  return 6;
}

// Reports a failing call on stderr and converts it to an exit code.
int bail(hems_status status) {
  std::fprintf(stderr, "hems: %s: %s\n", hems_status_name(status), hems_last_error());
  return exit_code_for(status);
}

using ScenarioPtr = std::unique_ptr<hems_scenario, decltype(&hems_scenario_free)>;
using TrajectoryPtr = std::unique_ptr<hems_trajectory, decltype(&hems_trajectory_free)>;
using RunlogPtr = std::unique_ptr<hems_runlog, decltype(&hems_runlog_free)>;
using ReportPtr = std::unique_ptr<hems_kkt_report, decltype(&hems_kkt_report_free)>;
using RepairPtr = std::unique_ptr<hems_repair_result, decltype(&hems_repair_result_free)>;

struct RunArgs {
  std::string scenario;
  std::string out_dir;
  double solar_scale = -1.0;  // negative means not given
  bool net_metering = false;
};

struct KktArgs {
  std::string trajectory;
  std::string scenario;
};

struct RepairArgs {
  std::string trajectory;
  std::string scenario;
  std::string out_csv;
};

struct OracleArgs {
  std::string scenario;
  int n = 2;
  double step = 0.05;
};

hems_status load_scenario(const std::string& path, ScenarioPtr& out) {
  note(1, "loading scenario " + path);
  hems_scenario* raw = nullptr;
  const hems_status st = hems_scenario_load(path.c_str(), &raw);
  if (st == HEMS_OK) out.reset(raw);
  return st;
}

hems_status load_trajectory(const std::string& path, TrajectoryPtr& out) {
  note(1, "loading trajectory " + path);
  hems_trajectory* raw = nullptr;
  const hems_status st = hems_trajectory_read_csv(path.c_str(), &raw);
  if (st == HEMS_OK) out.reset(raw);
  return st;
}

int cmd_run(const RunArgs& args) {
  ScenarioPtr scenario(nullptr, hems_scenario_free);
  hems_status st = load_scenario(args.scenario, scenario);
  if (st != HEMS_OK) return bail(st);

  if (args.solar_scale >= 0.0) {
    st = hems_scenario_set_solar_scale(scenario.get(), args.solar_scale);
    if (st != HEMS_OK) return bail(st);
  }
  if (args.net_metering) {
    st = hems_scenario_set_net_metering(scenario.get(), 1);
    if (st != HEMS_OK) return bail(st);
  }

  note(1, "running " + std::to_string(hems_scenario_steps(scenario.get())) +
              " steps at horizon " + std::to_string(hems_scenario_horizon(scenario.get())));
  hems_runlog* raw_log = nullptr;
  st = hems_run(scenario.get(), &raw_log);
  if (st != HEMS_OK) return bail(st);
  RunlogPtr log(raw_log, hems_runlog_free);

  const int steps = hems_runlog_steps(log.get());
  int simultaneous = 0;
  bool all_pass = true;
  for (int t = 0; t < steps; ++t) {
    int kkt_pass = 0, overlap = 0;
    double e_after = 0.0;
    hems_runlog_step_info(log.get(), t, &kkt_pass, &overlap, &e_after);
    simultaneous += overlap;
    all_pass = all_pass && kkt_pass != 0;
    note(2, "step " + std::to_string(t) + ": e=" + num(e_after) +
                (overlap ? " simultaneous" : "") + (kkt_pass ? "" : " kkt-fail"));
  }

  st = hems_write_bundle(log.get(), args.out_dir.c_str());
  if (st != HEMS_OK) return bail(st);

  std::printf("steps: %d\n", steps);
  std::printf("plan objective: %s\n", num(hems_runlog_objective(log.get())).c_str());
  std::printf("realized cost: %s\n", num(hems_runlog_cost(log.get())).c_str());
  std::printf("simultaneous steps: %d\n", simultaneous);
  std::printf("kkt: %s\n", all_pass ? "all pass" : "FAILURES");
  std::printf("bundle: %s\n", args.out_dir.c_str());
  return 0;
}

int cmd_kkt(const KktArgs& args) {
  ScenarioPtr scenario(nullptr, hems_scenario_free);
  hems_status st = load_scenario(args.scenario, scenario);
  if (st != HEMS_OK) return bail(st);
  TrajectoryPtr trajectory(nullptr, hems_trajectory_free);
  st = load_trajectory(args.trajectory, trajectory);
  if (st != HEMS_OK) return bail(st);

  hems_kkt_report* raw = nullptr;
  st = hems_kkt_check(scenario.get(), trajectory.get(), &raw);
  if (st != HEMS_OK) return bail(st);
  ReportPtr report(raw, hems_kkt_report_free);

  const double tol = hems_kkt_report_tolerance(report.get());
  static const struct {
    hems_residual_group group;
    const char* name;
  } kGroups[] = {
      {HEMS_RESIDUAL_PRIMAL, "primal feasibility"},
      {HEMS_RESIDUAL_DUAL, "dual feasibility"},
      {HEMS_RESIDUAL_SLACKNESS, "complementary slackness"},
      {HEMS_RESIDUAL_STATIONARITY_GRID, "stationarity p_grid"},
      {HEMS_RESIDUAL_STATIONARITY_CHARGE, "stationarity p_ch"},
      {HEMS_RESIDUAL_STATIONARITY_DISCHARGE, "stationarity p_dis"},
      {HEMS_RESIDUAL_STATIONARITY_CURTAIL, "stationarity p_c"},
  };
  std::printf("%-26s%-14s%s\n", "group", "residual", "within");
  for (const auto& g : kGroups) {
    const double r = hems_kkt_report_residual(report.get(), g.group);
    std::printf("%-26s%-14.3e%s\n", g.name, r, r <= tol ? "yes" : "NO");
  }
  std::printf("tolerance: %.3e\n", tol);

  const bool pass = hems_kkt_report_pass(report.get()) != 0;
  std::printf("result: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 4;
}

int cmd_repair(const RepairArgs& args) {
  ScenarioPtr scenario(nullptr, hems_scenario_free);
  hems_status st = load_scenario(args.scenario, scenario);
  if (st != HEMS_OK) return bail(st);
  TrajectoryPtr trajectory(nullptr, hems_trajectory_free);
  st = load_trajectory(args.trajectory, trajectory);
  if (st != HEMS_OK) return bail(st);

  hems_repair_result* raw = nullptr;
  st = hems_repair(scenario.get(), trajectory.get(), &raw);
  if (st != HEMS_OK) return bail(st);
  RepairPtr result(raw, hems_repair_result_free);

  hems_trajectory* raw_clean = nullptr;
  st = hems_repair_result_trajectory(result.get(), &raw_clean);
  if (st != HEMS_OK) return bail(st);
  TrajectoryPtr clean(raw_clean, hems_trajectory_free);

  st = hems_trajectory_write_csv(clean.get(), scenario.get(), args.out_csv.c_str());
  if (st != HEMS_OK) return bail(st);

  std::printf("rounds: %d\n", hems_repair_result_rounds(result.get()));
  std::printf("cost reduction: %s\n",
              num(hems_repair_result_cost_reduction(result.get())).c_str());
  std::printf("wrote: %s\n", args.out_csv.c_str());
  return 0;
}

int cmd_oracle(const OracleArgs& args) {
  ScenarioPtr scenario(nullptr, hems_scenario_free);
  hems_status st = load_scenario(args.scenario, scenario);
  if (st != HEMS_OK) return bail(st);

  note(1, "enumerating " + std::to_string(args.n) + " steps at " + num(args.step) + " kW");
  double grid_obj = 0.0, lp_obj = 0.0, bound = 0.0;
  st = hems_oracle(scenario.get(), args.n, args.step, 0, &grid_obj, &lp_obj, &bound);
  if (st != HEMS_OK) return bail(st);
  double comp_obj = 0.0;
  st = hems_oracle(scenario.get(), args.n, args.step, 1, &comp_obj, nullptr, nullptr);
  if (st != HEMS_OK) return bail(st);

  std::printf("lp objective: %s\n", num(lp_obj).c_str());
  std::printf("grid minimum: %s (gap %s)\n", num(grid_obj).c_str(),
              num(grid_obj - lp_obj).c_str());
  std::printf("with complementarity: %s (gap %s)\n", num(comp_obj).c_str(),
              num(comp_obj - lp_obj).c_str());
  std::printf("error bound: %s\n", num(bound).c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  read_verbosity_from_env();

  CLI::App app{"Home energy dispatch: solve, verify, repair, cross-check."};
  app.require_subcommand(1);
  app.footer(
      "Exit codes:\n"
      "  0  success\n"
      "  1  usage error\n"
      "  2  solver failure\n"
      "  3  invalid scenario or input file\n"
      "  4  optimality check failed\n"
      "  5  infeasible trajectory\n"
      "  6  internal failure\n"
      "\n"
      "HEMS_LOG=error|info|debug sets diagnostic verbosity on stderr.");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand(
      "run", "Execute a scenario's receding-horizon loop and write its output bundle.");
  run->add_option("--scenario", run_args.scenario, "Scenario JSON file")->required();
  run->add_option("--out", run_args.out_dir, "Output bundle directory")->required();
  run->add_option("--solar-scale", run_args.solar_scale,
                  "Override the scenario's solar scaling factor")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--net-metering", run_args.net_metering,
                "Allow grid export regardless of the scenario setting");

  KktArgs kkt_args;
  CLI::App* kkt = app.add_subcommand(
      "kkt", "Check a stored trajectory against the optimality conditions.");
  kkt->add_option("--trajectory", kkt_args.trajectory, "Trajectory CSV file")->required();
  kkt->add_option("--scenario", kkt_args.scenario, "Scenario JSON file")->required();

  RepairArgs repair_args;
  CLI::App* repair = app.add_subcommand(
      "repair", "Remove simultaneous charge/discharge from a stored trajectory.");
  repair->add_option("--trajectory", repair_args.trajectory, "Trajectory CSV file")
      ->required();
  repair->add_option("--scenario", repair_args.scenario, "Scenario JSON file")->required();
  repair->add_option("--out", repair_args.out_csv, "Where to write the repaired CSV")
      ->required();

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Compare the LP against brute-force enumeration on a short window.");
  oracle->add_option("--scenario", oracle_args.scenario, "Scenario JSON file")->required();
  oracle->add_option("--n", oracle_args.n, "Window length in steps (1 to 3)")
      ->required()
      ->check(CLI::Range(1, 3));
  oracle->add_option("--step", oracle_args.step, "Grid spacing in kW")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run->parsed()) return cmd_run(run_args);
  if (kkt->parsed()) return cmd_kkt(kkt_args);
  if (repair->parsed()) return cmd_repair(repair_args);
  return cmd_oracle(oracle_args);
}
