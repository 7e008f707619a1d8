#pragma once

// Domain types for a grid-connected home energy system with a battery and
// rooftop solar: battery parameters, tariff, exogenous solar/load profiles,
// and per-step decision trajectories, plus the stored-energy recursion,
// feasibility checking and the cost functional they share.
//
// Units: energies in kWh, powers in kW, dt in hours, prices in $/kWh.

#include <cstddef>
#include <string>
#include <vector>

namespace hems {

// Battery (electric storage system) parameters.
//
// eta_c is the charging efficiency (fraction of drawn power stored) and
// eta_d the discharging factor applied to delivered power in the stored
// energy recursion; with a physical discharge efficiency e the factor is
// 1/e, so eta_d >= 1 in practice. Only 0 < eta_c < eta_d is required.
struct EssParams {
  double e_min = 0.0;     // minimum stored energy
  double e_max = 0.0;     // maximum stored energy
  double e0 = 0.0;        // stored energy entering the first step
  double p_ch_max = 0.0;  // charging power limit
  double p_dis_max = 0.0; // discharging power limit
  double eta_c = 1.0;
  double eta_d = 1.0;
  double dt = 1.0;        // step length in hours

  // Throws std::invalid_argument when a field is out of range, with the
  // offending field named in the message.
  void validate() const;
};

// Purchase price series plus battery-use penalty weights.
//
// Under net metering the grid power may go negative and exported energy is
// credited at the same per-step price; otherwise p_grid >= 0 is enforced.
// energy_weighted_cost multiplies every cost term by dt so that objectives
// are priced per kWh instead of per kW sample; it defaults to off, which
// matches the per-step convention used throughout.
struct Tariff {
  std::vector<double> c_e;      // price per step, one entry per step, each >= 0
  double alpha = 0.0;           // charging penalty weight, >= 0
  double beta = 0.0;            // discharging penalty weight, >= 0
  bool net_metering = false;
  bool energy_weighted_cost = false;

  void validate() const;
};

// Exogenous per-step inputs: available solar power and household load.
struct ExogenousProfile {
  std::vector<double> p_sol;
  std::vector<double> p_load;

  std::size_t size() const { return p_sol.size(); }
  void validate() const;
};

// One control trajectory: grid draw, battery charge/discharge and solar
// curtailment per step. All four series must have equal length.
struct DecisionTrajectory {
  std::vector<double> p_grid;
  std::vector<double> p_ch;
  std::vector<double> p_dis;
  std::vector<double> p_c;

  std::size_t size() const { return p_grid.size(); }
  void validate() const;
};

// Stored energy over time; e.front() is the initial level, so the vector is
// one longer than the trajectory that produced it.
struct SocTrajectory {
  std::vector<double> e;
};

// One step of the stored-energy recursion:
//   e' = e + eta_c*dt*p_ch - eta_d*dt*p_dis
double soc_step(const EssParams& params, double e, double p_ch, double p_dis);

// Unrolls soc_step over a whole trajectory, starting from params.e0.
SocTrajectory soc_trajectory(const EssParams& params, const DecisionTrajectory& x);

enum class ViolationKind {
  GridExport,      // p_grid < 0 without net metering
  ChargeBelowZero,
  ChargeAboveMax,
  DischargeBelowZero,
  DischargeAboveMax,
  SocBelowMin,
  SocAboveMax,
  CurtailBelowZero,
  CurtailAboveSolar,
  PowerBalance,    // residual of p_grid = p_load - (p_sol - p_c) - p_dis + p_ch
};

struct Violation {
  ViolationKind kind;
  int step;
  double amount;   // positive magnitude of the violation

  std::string describe() const;
};

struct FeasibilityReport {
  bool feasible = true;
  double max_violation = 0.0;
  std::vector<Violation> violations;
};

// Checks every constraint of the dispatch problem at tolerance tol:
// power balance, grid sign (unless net metering), charge/discharge and
// curtailment boxes, and stored-energy bounds after every step.
// Throws std::invalid_argument on length mismatches.
FeasibilityReport check_feasible(const EssParams& params,
                                 const ExogenousProfile& prof,
                                 const Tariff& tariff,
                                 const DecisionTrajectory& x,
                                 double tol = 1e-7);

// Operating cost sum_t (c_e[t]*p_grid[t] + alpha*p_ch[t] + beta*p_dis[t]).
// Prices apply per step without a dt factor unless
// tariff.energy_weighted_cost is set, in which case each term is scaled
// by dt.
double cost(const Tariff& tariff, const DecisionTrajectory& x, double dt = 1.0);

// min(p_ch[t], p_dis[t]) per step; an entry above tolerance means the
// battery is charging and discharging in the same step.
std::vector<double> simultaneity_index(const DecisionTrajectory& x);

} // namespace hems
