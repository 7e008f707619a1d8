// C wrapper over the core library. Each opaque handle owns one core
// object; functions translate exceptions into status codes and stash the
// message in a thread-local buffer for hems_last_error().

#include "hems.h"

#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "hems/io.hpp"
#include "hems/kkt.hpp"
#include "hems/model.hpp"
#include "hems/mpc.hpp"
#include "hems/oracle.hpp"
#include "hems/problem.hpp"
#include "hems/repair.hpp"
#include "hems/solver.hpp"

struct hems_scenario {
  hems::mpc::ScenarioConfig config;
};

struct hems_trajectory {
  hems::DecisionTrajectory x;
  int start_hour = 0;
};

struct hems_runlog {
  hems::mpc::RunLog log;
};

struct hems_kkt_report {
  hems::kkt::Report report;
};

struct hems_repair_result {
  hems::repair::RepairResult result;
  int start_hour = 0;
};

namespace {

thread_local std::string t_last_error;

hems_status fail(hems_status code, const std::string& message) {
  t_last_error = message;
  return code;
}

// Runs fn and maps any escaping exception to a status code. Subtypes are
// listed before their bases, so the catch order is load-bearing:
// InfeasibleInput derives from invalid_argument, and the named runtime
// errors must not fall through to the generic handler.
template <typename Fn>
hems_status guarded(Fn&& fn) {
  try {
    fn();
    return HEMS_OK;
  } catch (const hems::mpc::ConfigError& e) {
    return fail(HEMS_ERR_CONFIG, e.what());
  } catch (const hems::io::IoError& e) {
    return fail(HEMS_ERR_IO, e.what());
  } catch (const hems::mpc::SolverAbort& e) {
    return fail(HEMS_ERR_SOLVER, e.what());
  } catch (const hems::lp::SolverError& e) {
    return fail(HEMS_ERR_SOLVER, e.what());
  } catch (const hems::repair::InfeasibleInput& e) {
    return fail(HEMS_ERR_INFEASIBLE, e.what());
  } catch (const hems::repair::RepairError& e) {
    return fail(HEMS_ERR_PRECONDITION, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(HEMS_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(HEMS_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(HEMS_ERR_INTERNAL, e.what());
  }
}

// The scenario's first window at the trajectory's length, shared by the
// stored-trajectory operations.
struct Window {
  hems::ExogenousProfile prof;
  hems::Tariff tariff;
};

Window first_window(const hems::mpc::ScenarioConfig& config, int n) {
  if (n < 1) throw std::invalid_argument("trajectory is empty");
  const hems::mpc::ResolvedProfiles rp = hems::mpc::resolve_profiles(config);
  return {hems::mpc::forecast_window(rp, config.start_hour, n),
          config.tariff.window(config.start_hour, n)};
}

} // namespace

extern "C" {

const char* hems_status_name(hems_status status) {
  switch (status) {
    case HEMS_OK: return "ok";
    case HEMS_ERR_ARGUMENT: return "invalid argument";
    case HEMS_ERR_CONFIG: return "config error";
    case HEMS_ERR_IO: return "io error";
    case HEMS_ERR_SOLVER: return "solver failure";
    case HEMS_ERR_INFEASIBLE: return "infeasible input";
    case HEMS_ERR_PRECONDITION: return "precondition failed";
    case HEMS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hems_last_error(void) { return t_last_error.c_str(); }

hems_status hems_scenario_parse(const char* json_text, hems_scenario** out) {
  if (!json_text || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto* s = new hems_scenario{hems::mpc::parse_scenario(json_text)};
    *out = s;
  });
}

hems_status hems_scenario_load(const char* path, hems_scenario** out) {
  if (!path || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto* s = new hems_scenario{hems::mpc::load_scenario(path)};
    *out = s;
  });
}

void hems_scenario_free(hems_scenario* s) { delete s; }

hems_status hems_scenario_set_solar_scale(hems_scenario* s, double scale) {
  if (!s) return fail(HEMS_ERR_ARGUMENT, "null scenario");
  return guarded([&] {
    hems::mpc::ProfileSpec candidate = s->config.profiles;
    candidate.solar_scale = scale;
    candidate.validate();  // rejects negative or non-finite values
    s->config.profiles = candidate;
  });
}

hems_status hems_scenario_set_net_metering(hems_scenario* s, int enabled) {
  if (!s) return fail(HEMS_ERR_ARGUMENT, "null scenario");
  s->config.tariff.net_metering = enabled != 0;
  return HEMS_OK;
}

int hems_scenario_horizon(const hems_scenario* s) {
  return s ? s->config.horizon : 0;
}

int hems_scenario_steps(const hems_scenario* s) {
  return s ? s->config.steps : 0;
}

hems_status hems_trajectory_from_arrays(int n, const double* p_grid,
                                        const double* p_ch, const double* p_dis,
                                        const double* p_c, hems_trajectory** out) {
  if (!p_grid || !p_ch || !p_dis || !p_c || !out)
    return fail(HEMS_ERR_ARGUMENT, "null argument");
  if (n < 1) return fail(HEMS_ERR_ARGUMENT, "trajectory length must be >= 1");
  auto* h = new hems_trajectory;
  h->x.p_grid.assign(p_grid, p_grid + n);
  h->x.p_ch.assign(p_ch, p_ch + n);
  h->x.p_dis.assign(p_dis, p_dis + n);
  h->x.p_c.assign(p_c, p_c + n);
  *out = h;
  return HEMS_OK;
}

hems_status hems_trajectory_read_csv(const char* path, hems_trajectory** out) {
  if (!path || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto* h = new hems_trajectory;
    try {
      h->x = hems::io::parse_trajectory_csv(path, &h->start_hour);
    } catch (...) {
      delete h;
      throw;
    }
    *out = h;
  });
}

hems_status hems_trajectory_write_csv(const hems_trajectory* x,
                                      const hems_scenario* s, const char* path) {
  if (!x || !s || !path) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hems::SocTrajectory soc = hems::soc_trajectory(s->config.ess, x->x);
    const std::vector<double> soc_after(soc.e.begin() + 1, soc.e.end());
    hems::io::atomic_write(path,
                           hems::io::trajectory_csv(x->x, soc_after, x->start_hour));
  });
}

void hems_trajectory_free(hems_trajectory* x) { delete x; }

int hems_trajectory_size(const hems_trajectory* x) {
  return x ? static_cast<int>(x->x.size()) : 0;
}

hems_status hems_trajectory_step(const hems_trajectory* x, int t, double* p_grid,
                                 double* p_ch, double* p_dis, double* p_c) {
  if (!x) return fail(HEMS_ERR_ARGUMENT, "null trajectory");
  if (t < 0 || t >= static_cast<int>(x->x.size()))
    return fail(HEMS_ERR_ARGUMENT, "step index out of range");
  if (p_grid) *p_grid = x->x.p_grid[t];
  if (p_ch) *p_ch = x->x.p_ch[t];
  if (p_dis) *p_dis = x->x.p_dis[t];
  if (p_c) *p_c = x->x.p_c[t];
  return HEMS_OK;
}

hems_status hems_run(const hems_scenario* s, hems_runlog** out) {
  if (!s || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto* log = new hems_runlog{hems::mpc::run(s->config)};
    *out = log;
  });
}

void hems_runlog_free(hems_runlog* log) { delete log; }

int hems_runlog_steps(const hems_runlog* log) {
  return log ? static_cast<int>(log->log.steps.size()) : 0;
}

double hems_runlog_objective(const hems_runlog* log) {
  return log ? log->log.first_plan_objective : 0.0;
}

double hems_runlog_cost(const hems_runlog* log) {
  return log ? log->log.realized_cost : 0.0;
}

hems_status hems_runlog_step_info(const hems_runlog* log, int t, int* kkt_pass,
                                  int* simultaneous, double* e_after) {
  if (!log) return fail(HEMS_ERR_ARGUMENT, "null run log");
  if (t < 0 || t >= static_cast<int>(log->log.steps.size()))
    return fail(HEMS_ERR_ARGUMENT, "step index out of range");
  const hems::mpc::StepRecord& rec = log->log.steps[t];
  if (kkt_pass) *kkt_pass = rec.kkt.pass ? 1 : 0;
  if (simultaneous) *simultaneous = rec.simultaneous ? 1 : 0;
  if (e_after) *e_after = rec.e_after;
  return HEMS_OK;
}

hems_status hems_runlog_applied(const hems_runlog* log, hems_trajectory** out) {
  if (!log || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  auto* h = new hems_trajectory{log->log.applied, log->log.config.start_hour};
  *out = h;
  return HEMS_OK;
}

hems_status hems_write_bundle(const hems_runlog* log, const char* dir) {
  if (!log || !dir) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] { hems::mpc::write_bundle(log->log, dir); });
}

hems_status hems_kkt_check(const hems_scenario* s, const hems_trajectory* x,
                           hems_kkt_report** out) {
  if (!s || !x || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto* r = new hems_kkt_report{hems::mpc::check_stored(s->config, x->x)};
    *out = r;
  });
}

void hems_kkt_report_free(hems_kkt_report* r) { delete r; }

int hems_kkt_report_pass(const hems_kkt_report* r) {
  return r && r->report.pass ? 1 : 0;
}

double hems_kkt_report_tolerance(const hems_kkt_report* r) {
  return r ? r->report.tolerance : -1.0;
}

double hems_kkt_report_residual(const hems_kkt_report* r, hems_residual_group group) {
  if (!r) return -1.0;
  const hems::kkt::Report& rep = r->report;
  const auto worst = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = e > m ? e : m;
    return m;
  };
  switch (group) {
    case HEMS_RESIDUAL_PRIMAL: return rep.primal_residual;
    case HEMS_RESIDUAL_DUAL: return rep.dual_residual;
    case HEMS_RESIDUAL_SLACKNESS: return rep.slackness_residual;
    case HEMS_RESIDUAL_STATIONARITY_GRID: return worst(rep.stationarity_grid);
    case HEMS_RESIDUAL_STATIONARITY_CHARGE: return worst(rep.stationarity_charge);
    case HEMS_RESIDUAL_STATIONARITY_DISCHARGE: return worst(rep.stationarity_discharge);
    case HEMS_RESIDUAL_STATIONARITY_CURTAIL: return worst(rep.stationarity_curtail);
  }
  return -1.0;
}

double hems_kkt_report_max_residual(const hems_kkt_report* r) {
  return r ? r->report.max_residual() : -1.0;
}

hems_status hems_repair(const hems_scenario* s, const hems_trajectory* x,
                        hems_repair_result** out) {
  if (!s || !x || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const Window w = first_window(s->config, static_cast<int>(x->x.size()));
    auto* r = new hems_repair_result;
    try {
      r->result = hems::repair::repair_until_clean(x->x, s->config.ess, w.prof,
                                                   w.tariff,
                                                   s->config.feasibility_tol);
      r->start_hour = x->start_hour;
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

void hems_repair_result_free(hems_repair_result* r) { delete r; }

int hems_repair_result_rounds(const hems_repair_result* r) {
  return r ? r->result.rounds : 0;
}

double hems_repair_result_cost_reduction(const hems_repair_result* r) {
  return r ? r->result.cost_reduction : 0.0;
}

hems_status hems_repair_result_trajectory(const hems_repair_result* r,
                                          hems_trajectory** out) {
  if (!r || !out) return fail(HEMS_ERR_ARGUMENT, "null argument");
  auto* h = new hems_trajectory{r->result.x, r->start_hour};
  *out = h;
  return HEMS_OK;
}

hems_status hems_oracle(const hems_scenario* s, int n, double step,
                        int enforce_complementarity, double* objective,
                        double* lp_objective, double* error_bound) {
  if (!s) return fail(HEMS_ERR_ARGUMENT, "null scenario");
  try {
    const Window w = first_window(s->config, n);
    const hems::oracle::GridSpec grid{step};

    const hems::lp::P1 p1 = hems::lp::build_p1(s->config.ess, w.prof, w.tariff);
    const hems::lp::SolveOutcome ref = hems::lp::solve(p1.lp);
    if (ref.status != hems::lp::SolveStatus::Optimal)
      throw hems::lp::SolverError(std::string("reference solve ended ") +
                                  hems::lp::to_string(ref.status));

    const hems::oracle::EnumerationResult res = hems::oracle::enumerate(
        s->config.ess, w.prof, w.tariff, grid, enforce_complementarity != 0);

    if (objective) *objective = res.objective;
    if (lp_objective) *lp_objective = ref.objective;
    if (error_bound) *error_bound = grid.error_bound(w.tariff, s->config.dt);
    return HEMS_OK;
  } catch (const std::invalid_argument& e) {
    return fail(HEMS_ERR_ARGUMENT, e.what());
  } catch (const hems::mpc::ConfigError& e) {
    return fail(HEMS_ERR_CONFIG, e.what());
  } catch (const hems::io::IoError& e) {
    return fail(HEMS_ERR_IO, e.what());
  } catch (const hems::lp::SolverError& e) {
    return fail(HEMS_ERR_SOLVER, e.what());
  } catch (const std::runtime_error& e) {
    // enumerate() reports an empty feasible grid this way
    return fail(HEMS_ERR_INFEASIBLE, e.what());
  } catch (const std::exception& e) {
    return fail(HEMS_ERR_INTERNAL, e.what());
  }
}

} // extern "C"
