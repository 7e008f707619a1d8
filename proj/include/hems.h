#ifndef HEMS_H
#define HEMS_H

/*
 * C interface to the home-energy-management toolkit.
 *
 * Every object lives behind an opaque handle created by a hems_* function
 * and released by the matching *_free. Functions that can fail return a
 * hems_status; on failure the out-parameters are untouched and
 * hems_last_error() holds a message describing what went wrong. The
 * message buffer is thread-local and overwritten by the next failure on
 * the same thread.
 *
 * Units follow the core library: powers in kW, energies in kWh, step
 * lengths in hours, prices in $/kWh.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hems_status {
  HEMS_OK = 0,
  HEMS_ERR_ARGUMENT = 1,     /* null handle, bad value, bad index */
  HEMS_ERR_CONFIG = 2,       /* scenario file or value rejected */
  HEMS_ERR_IO = 3,           /* file missing, unwritable, or malformed */
  HEMS_ERR_SOLVER = 4,       /* LP solve did not reach an optimum */
  HEMS_ERR_INFEASIBLE = 5,   /* input violates the dispatch constraints */
  HEMS_ERR_PRECONDITION = 6, /* operation gave up; see hems_last_error */
  HEMS_ERR_INTERNAL = 7      /* unexpected failure; indicates a bug */
} hems_status;

/* Short lowercase name for a status code, e.g. "config error". */
const char* hems_status_name(hems_status status);

/* Message from the most recent failing call on this thread; empty string
 * if nothing failed yet. The pointer stays valid until the next failure. */
const char* hems_last_error(void);

typedef struct hems_scenario hems_scenario;
typedef struct hems_trajectory hems_trajectory;
typedef struct hems_runlog hems_runlog;
typedef struct hems_kkt_report hems_kkt_report;
typedef struct hems_repair_result hems_repair_result;

/*
 * Scenarios
 *
 * A scenario bundles battery parameters, the tariff, 24-hour solar and
 * load profiles, and run lengths. The JSON format mirrors the core
 * configuration: every key is optional, "{}" is the built-in flat-price
 * day, unknown keys are rejected. CSV paths inside a file loaded from
 * disk resolve relative to that file's directory.
 */

hems_status hems_scenario_parse(const char* json_text, hems_scenario** out);
hems_status hems_scenario_load(const char* path, hems_scenario** out);
void hems_scenario_free(hems_scenario* s);

/* Override the solar scaling factor (>= 0) or the export rule after
 * loading; used for command-line overrides on a stored scenario. */
hems_status hems_scenario_set_solar_scale(hems_scenario* s, double scale);
hems_status hems_scenario_set_net_metering(hems_scenario* s, int enabled);

/* Prediction steps per solve, and wall-clock steps in a run.
 * Return 0 when the handle is null. */
int hems_scenario_horizon(const hems_scenario* s);
int hems_scenario_steps(const hems_scenario* s);

/*
 * Trajectories
 *
 * A trajectory holds per-step grid draw, battery charge, battery
 * discharge and solar curtailment, plus the hour of day its first step
 * starts at (0 unless read from a file that says otherwise). The CSV
 * form is the same one run bundles use: a header row, then one row per
 * step with hour, the four controls, and the stored energy at the end of
 * the step. On write the stored-energy column is recomputed from the
 * scenario's battery, so the file is consistent even for hand-built
 * trajectories.
 */

hems_status hems_trajectory_from_arrays(int n, const double* p_grid,
                                        const double* p_ch, const double* p_dis,
                                        const double* p_c, hems_trajectory** out);
hems_status hems_trajectory_read_csv(const char* path, hems_trajectory** out);
hems_status hems_trajectory_write_csv(const hems_trajectory* x,
                                      const hems_scenario* s, const char* path);
void hems_trajectory_free(hems_trajectory* x);

/* Number of steps; 0 when the handle is null. */
int hems_trajectory_size(const hems_trajectory* x);

/* Controls at step t (0-based). Each output pointer may be NULL. */
hems_status hems_trajectory_step(const hems_trajectory* x, int t, double* p_grid,
                                 double* p_ch, double* p_dis, double* p_c);

/*
 * Receding-horizon runs
 *
 * hems_run executes the scenario's full loop: solve the horizon LP at
 * each wall-clock step, verify the optimality conditions, apply the
 * first control, advance the battery. The run log keeps every plan and
 * report; the getters below expose the summary a front end needs.
 */

hems_status hems_run(const hems_scenario* s, hems_runlog** out);
void hems_runlog_free(hems_runlog* log);

/* Wall-clock steps executed; 0 when the handle is null. */
int hems_runlog_steps(const hems_runlog* log);

/* Objective of the first step's plan. */
double hems_runlog_objective(const hems_runlog* log);

/* Cost of the applied controls priced hour by hour over the run. */
double hems_runlog_cost(const hems_runlog* log);

/* Per-step flags and resulting stored energy. kkt_pass reports the
 * optimality check of that step's plan, simultaneous whether the applied
 * step both charges and discharges. Output pointers may be NULL. */
hems_status hems_runlog_step_info(const hems_runlog* log, int t, int* kkt_pass,
                                  int* simultaneous, double* e_after);

/* Copy of the applied first-step controls as a new trajectory. */
hems_status hems_runlog_applied(const hems_runlog* log, hems_trajectory** out);

/* Write trajectory.csv, kkt.json and summary.json into dir (created if
 * missing). Numeric fields carry 12 significant digits and files are
 * replaced atomically, so re-running a scenario reproduces the bundle
 * byte for byte. */
hems_status hems_write_bundle(const hems_runlog* log, const char* dir);

/*
 * Optimality check of a stored trajectory
 *
 * The trajectory is treated as a dispatch plan for the scenario's first
 * window (window length = trajectory length). The LP is solved once for
 * reference multipliers and the stored controls are checked against the
 * full first-order conditions. Any optimal point passes; an edited one
 * fails. A failing report is still HEMS_OK here; inspect *_pass.
 */

typedef enum hems_residual_group {
  HEMS_RESIDUAL_PRIMAL = 0,
  HEMS_RESIDUAL_DUAL = 1,
  HEMS_RESIDUAL_SLACKNESS = 2,
  HEMS_RESIDUAL_STATIONARITY_GRID = 3,
  HEMS_RESIDUAL_STATIONARITY_CHARGE = 4,
  HEMS_RESIDUAL_STATIONARITY_DISCHARGE = 5,
  HEMS_RESIDUAL_STATIONARITY_CURTAIL = 6
} hems_residual_group;

hems_status hems_kkt_check(const hems_scenario* s, const hems_trajectory* x,
                           hems_kkt_report** out);
void hems_kkt_report_free(hems_kkt_report* r);

/* 1 when every residual group is within tolerance. */
int hems_kkt_report_pass(const hems_kkt_report* r);

/* Effective threshold the check used: tol * (1 + max |data|). */
double hems_kkt_report_tolerance(const hems_kkt_report* r);

/* Residual of one group (stationarity groups report their worst step),
 * or the maximum over all groups. Negative when the handle is null or
 * the group is unknown. */
double hems_kkt_report_residual(const hems_kkt_report* r, hems_residual_group group);
double hems_kkt_report_max_residual(const hems_kkt_report* r);

/*
 * Repair of simultaneous charge/discharge
 *
 * Removes every step that charges and discharges at once from a feasible
 * trajectory, without increasing cost, using the scenario's first window
 * for prices and profiles (window length = trajectory length). An
 * infeasible input returns HEMS_ERR_INFEASIBLE; a trajectory the rewrites
 * cannot clean returns HEMS_ERR_PRECONDITION. A clean input succeeds
 * with zero rounds and an unchanged trajectory.
 */

hems_status hems_repair(const hems_scenario* s, const hems_trajectory* x,
                        hems_repair_result** out);
void hems_repair_result_free(hems_repair_result* r);

/* Rewrite rounds applied; 0 means the input was already clean. */
int hems_repair_result_rounds(const hems_repair_result* r);

/* cost(input) - cost(output); never negative. */
double hems_repair_result_cost_reduction(const hems_repair_result* r);

/* Copy of the repaired trajectory. */
hems_status hems_repair_result_trajectory(const hems_repair_result* r,
                                          hems_trajectory** out);

/*
 * Brute-force cross-check
 *
 * Enumerates every feasible dispatch for the scenario's first n steps
 * (n in 1..3) on a kW grid of the given step and compares against the
 * LP. With enforce_complementarity nonzero the enumeration additionally
 * rejects any step that charges and discharges at once, which turns the
 * search into the nonconvex variant of the problem.
 *
 * On success *objective holds the grid minimum, *lp_objective the LP
 * optimum for the same window, and *error_bound the worst-case excess of
 * the grid minimum over the true optimum; each pointer may be NULL.
 * Returns HEMS_ERR_INFEASIBLE when no grid point is feasible.
 */
hems_status hems_oracle(const hems_scenario* s, int n, double step,
                        int enforce_complementarity, double* objective,
                        double* lp_objective, double* error_bound);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HEMS_H */
