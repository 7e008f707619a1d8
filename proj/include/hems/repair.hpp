#pragma once

// Constructive removal of simultaneous charge/discharge from feasible
// dispatch trajectories. A step that charges and discharges at once burns
// energy in both conversions; these transformations cancel the overlap
// while preserving feasibility and never increasing cost, so any feasible
// plan has a clean counterpart that is at least as good.
//
// Two exact rewrites cover the cases that arise at optimal points: a
// terminal rewrite for a simultaneous step with no charging afterwards,
// and a forwarding rewrite that shrinks the overlap now and reduces the
// next charging step by the energy the battery no longer lost. Both leave
// every other step untouched. repair_until_clean() drives them, with two
// balance-preserving fallbacks for hand-made inputs that fit neither
// precondition.

#include <optional>
#include <stdexcept>
#include <vector>

#include "hems/model.hpp"

namespace hems::repair {

// Raised when repair cannot proceed: round budget exhausted or no
// transformation applies. Indicates a malformed input or a logic bug, not
// a tolerable condition.
struct RepairError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by repair_until_clean when the input trajectory fails the
// feasibility check on entry; a subtype so callers can report bad input
// data separately from other argument mistakes.
struct InfeasibleInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Last step whose smaller of (p_ch, p_dis) strictly exceeds tol, or empty.
// A value exactly equal to tol does not count.
std::optional<int> detect(const DecisionTrajectory& x, double tol = 1e-7);

// Sum of p_ch over all steps: the quantity every repair round strictly
// decreases, which is what bounds the number of rounds.
double total_charging(const DecisionTrajectory& x);

// How the forwarding rewrite rebalances the reduced charging at the target
// step: buy less from the grid first (saves money whenever energy costs
// anything), or curtail more solar first.
enum class SplitPolicy { GridFirst, CurtailFirst };

// Rewrite for a simultaneous step tau after which the battery never
// charges. Requires, within tol: zero grid draw at tau, all solar
// curtailed at tau, no later charging, and simultaneity at tau. The step
// becomes [0, 0, p_dis - p_ch, p_sol]: the overlap is cancelled and only
// the net discharge remains. Stored energy afterwards sits higher by
// (eta_d - eta_c)*dt*p_ch(tau), which the preconditions guarantee stays
// under the cap. Cost drops by (alpha + beta)*p_ch(tau), price-weighted
// when the tariff weights by energy.
// Throws std::invalid_argument when a precondition fails.
DecisionTrajectory repair_terminal(const DecisionTrajectory& x, int tau,
                                   const EssParams& params, const ExogenousProfile& prof,
                                   double tol = 1e-7);

// Rewrite for a simultaneous step tau whose next charging step is target.
// Requires, within tol: simultaneity at tau with discharge >= charge, no
// charging strictly between tau and target, charging at target, and no
// discharging at target. Both sides at tau shrink by
//   p = min(eta_c * p_ch(target) / (eta_d - eta_c), p_ch(tau)),
// and the charging at target shrinks by (eta_d/eta_c - 1)*p, exactly the
// extra energy the battery now carries into target, so stored energy from
// target+1 onwards is unchanged. The power freed at target is split into a
// grid reduction a and a curtailment increase b per the policy, with
// a + b matching the freed amount exactly; a split that does not fit its
// boxes means the input violated feasibility and raises std::logic_error
// rather than being clamped. Cost drops by
// p*(alpha + beta + alpha*(eta_d/eta_c - 1)) + a*c_e(target).
DecisionTrajectory repair_forwarding(const DecisionTrajectory& x, int tau, int target,
                                     const EssParams& params, const ExogenousProfile& prof,
                                     SplitPolicy policy = SplitPolicy::GridFirst,
                                     double tol = 1e-7);

enum class RoundMethod {
  Terminal,          // repair_terminal
  Forwarding,        // repair_forwarding
  SymmetricRemoval,  // fallback: both sides minus min(p_ch, p_dis)
  NeutralRemoval,    // fallback: storage-neutral removal with rebalancing
};

const char* to_string(RoundMethod method);

struct RepairRound {
  int step = 0;  // simultaneous step handled this round
  RoundMethod method = RoundMethod::Terminal;
  double charging_removed = 0.0;  // drop in total_charging, > 0
};

struct RepairResult {
  DecisionTrajectory x;
  int rounds = 0;
  double cost_reduction = 0.0;  // cost(input) - cost(output), never negative
  std::vector<RepairRound> log;
};

// Repeatedly removes the last simultaneous step until none remains. Each
// round tries the exact rewrites first and falls back to the
// balance-preserving removals; a candidate is accepted only after a full
// feasibility re-check and a cost comparison. Total charging strictly
// decreases every round and each round cleans at least one step, so at
// most one round per step is needed; max_rounds of 0 means the horizon
// length. A clean input comes back unchanged with rounds == 0.
// Throws InfeasibleInput when x is infeasible, RepairError when the
// round budget is exhausted or no transformation applies.
RepairResult repair_until_clean(const DecisionTrajectory& x, const EssParams& params,
                                const ExogenousProfile& prof, const Tariff& tariff,
                                double tol = 1e-7, int max_rounds = 0);

} // namespace hems::repair
