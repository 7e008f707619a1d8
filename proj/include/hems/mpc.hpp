#pragma once

// Receding-horizon execution: a scenario bundles the battery, a tariff
// schedule, 24-hour solar/load profiles and run lengths; run() solves the
// dispatch LP at every wall-clock step, applies the first control, advances
// the stored energy and logs the plan together with its optimality report.
// Forecasts are perfect foresight over the profile day, wrapping modulo 24,
// so any horizon is available from any start hour.
//
// Profiles come from hourly CSV files or from built-in synthetic curves: a
// clipped-sinusoid solar day peaking at 3 kW at 13:00 and a two-peak
// household load reaching 2 kW in the evening. Solar CSVs carry irradiance
// in W/m^2 and are converted through array area, array efficiency and
// inverter efficiency; the conversion applies only here, while the battery
// efficiencies live in the stored-energy recursion.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hems/kkt.hpp"
#include "hems/model.hpp"

namespace hems::mpc {

// Scenario file or value problems; distinct from std::invalid_argument so
// callers can map user-input mistakes to their own exit path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// LP failure during a run; step is the wall-clock index, or -1 when the
// solve was a one-off reference solve rather than part of a run.
struct SolverAbort : std::runtime_error {
  int step;
  SolverAbort(int step_, const std::string& what_) : std::runtime_error(what_), step(step_) {}
};

// One named price window. Hours are [start_hour, end_hour) on a 24-hour
// clock; start above end wraps past midnight, as in 21 -> 9.
struct TariffPeriod {
  std::string name;
  int start_hour = 0;
  int end_hour = 0;
  double price = 0.0;
};

// Either a single flat price or named periods that cover each of the 24
// hours exactly once. Penalty weights and the export rule apply to every
// hour regardless.
struct TariffSpec {
  std::optional<double> flat_price = 0.11;
  std::vector<TariffPeriod> periods;
  double alpha = 0.0;
  double beta = 0.0;
  bool net_metering = false;

  void validate() const;
  std::vector<double> hourly_prices() const;  // 24 entries
  // Per-step tariff for n steps starting at the given absolute hour.
  Tariff window(int first_hour, int n) const;
};

// Where the 24-hour profiles come from. Empty paths select the synthetic
// curves. The conversion parameters apply to solar CSVs, which carry
// irradiance; load CSVs are already in kW.
struct ProfileSpec {
  std::string solar_csv;
  std::string load_csv;
  double solar_scale = 1.0;
  double array_area_m2 = 20.0;
  double array_efficiency = 0.16;
  double inverter_efficiency = 0.95;

  void validate() const;
};

struct ScenarioConfig {
  EssParams ess{0.75, 4.25, 2.0, 3.0, 3.0, 0.95, 1.0 / 0.95, 1.0};
  TariffSpec tariff;
  ProfileSpec profiles;
  int horizon = 24;      // prediction steps per solve
  double dt = 1.0;       // hours per step; also forced into ess.dt
  int steps = 24;        // wall-clock steps to execute
  int start_hour = 0;
  double feasibility_tol = 1e-7;
  double kkt_tol = 1e-8;

  void validate() const;
};

// Scenario JSON mirrors the field names above, all keys optional, so {} is
// the baseline flat-price day. The ess object takes no dt key; the step
// length is the scenario-level dt. Unknown keys are rejected. CSV paths in
// a file loaded by load_scenario are resolved relative to that file.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

// Irradiance CSV (W/m^2, hours 0-23) to solar power in kW:
//   p = irradiance * area * array_eff * inverter_eff / 1000 * scale.
// Rejects negative irradiance.
std::vector<double> ingest_solar(const std::string& csv_path,
                                 double array_area_m2 = 20.0,
                                 double array_efficiency = 0.16,
                                 double inverter_efficiency = 0.95,
                                 double scale = 1.0);

std::vector<double> synthetic_solar(double scale = 1.0);
std::vector<double> synthetic_load();

struct ResolvedProfiles {
  std::vector<double> solar;  // 24 entries, kW
  std::vector<double> load;
};

ResolvedProfiles resolve_profiles(const ScenarioConfig& config);

// n-step slice of the 24-hour profiles starting at an absolute hour,
// wrapping past midnight.
ExogenousProfile forecast_window(const ResolvedProfiles& rp, int first_hour, int n);

struct StepRecord {
  int step = 0;
  int hour = 0;           // wall-clock hour of day
  double e_before = 0.0;
  double e_after = 0.0;   // e_before advanced by the applied controls
  double p_grid = 0.0;    // applied first-step controls
  double p_ch = 0.0;
  double p_dis = 0.0;
  double p_c = 0.0;
  double objective = 0.0;  // plan objective
  kkt::Report kkt;
  bool simultaneous = false;       // applied step charges and discharges
  bool plan_simultaneous = false;  // any step of the plan does
  DecisionTrajectory plan;
};

struct RunLog {
  ScenarioConfig config;
  std::vector<double> hourly_solar;  // resolved inputs the run used
  std::vector<double> hourly_load;
  std::vector<StepRecord> steps;
  std::vector<double> realized_soc;  // steps+1 entries, starts at ess.e0
  DecisionTrajectory applied;        // first-step controls in sequence
  double first_plan_objective = 0.0;
  double realized_cost = 0.0;        // applied controls priced hour by hour
};

// Executes the receding-horizon loop. Throws SolverAbort if any step fails
// to solve, with the step index and the window inputs in the message.
RunLog run(const ScenarioConfig& config);

// Optimality report for a stored trajectory treated as a dispatch plan for
// the scenario's first window (length = trajectory length): the LP is
// solved once for reference multipliers, then the stored controls are
// checked against them. Any optimal point passes; an edited one fails.
kkt::Report check_stored(const ScenarioConfig& config, const DecisionTrajectory& x);

// Writes trajectory.csv, kkt.json and summary.json into dir (created if
// missing). summary.json reports the first plan's objective, the realized
// cost, wall-clock steps with overlapping charge/discharge, the tariff
// regime classification, and the cost freed by repairing the applied
// trajectory (null if repair gave up).
void write_bundle(const RunLog& log, const std::string& dir);

} // namespace hems::mpc
