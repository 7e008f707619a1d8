#pragma once

// Optimality verification for the dispatch LP. check() evaluates the full
// first-order conditions of a primal/dual pair: feasibility of both sides,
// complementary slackness, and the per-variable stationarity identities
// written in terms of the named constraint multipliers. Because the problem
// is a convex LP these conditions are necessary and sufficient, so a passing
// report certifies global optimality of the pair.
//
// certificate_of_suboptimality() addresses one specific question: can a
// point that charges and discharges the battery in the same step satisfy
// those conditions? Adding the charge and discharge stationarity rows
// (the latter scaled by eta_d/eta_c) cancels the stored-energy multiplier
// sums and leaves a small number of signed terms whose total must be zero
// at any such point. When the total is provably positive, no optimal
// solution charges and discharges simultaneously at that step.

#include <string>
#include <vector>

#include "hems/model.hpp"
#include "hems/problem.hpp"
#include "hems/solver.hpp"

namespace hems::kkt {

// Residuals are grouped; each entry is a maximum over the rows or steps in
// its group and is >= 0. The per-step vectors expose where a failure sits.
struct Report {
  double primal_residual = 0.0;     // worst constraint violation of x
  double dual_residual = 0.0;       // magnitude of the most negative lambda
  double slackness_residual = 0.0;  // max |lambda_i * slack_i|

  // Stationarity residual per step, one vector per decision family.
  std::vector<double> stationarity_grid;
  std::vector<double> stationarity_charge;
  std::vector<double> stationarity_discharge;
  std::vector<double> stationarity_curtail;

  double tolerance = 0.0;  // effective threshold: tol * (1 + max |data|)
  bool pass = false;

  double stationarity_residual() const;  // max over the four vectors
  double max_residual() const;           // max over every group
};

// Evaluates all optimality conditions for outcome against the LP it solved.
// The stationarity identities are assembled from multipliers looked up by
// constraint name and step, never by raw row position, so a reordering of
// the LP emission cannot pass by accident. Under net metering the grid
// lower-bound multiplier does not exist and the grid condition reduces to
// price == balance multiplier.
//
// tol scales with the data: a group passes when its residual is at most
// tol * (1 + max absolute value over coefficients, bounds and multipliers).
// Throws std::invalid_argument if the outcome is not Optimal or its
// primal/dual vectors do not match the LP's shape.
Report check(const lp::LpStandardForm& lpf, const lp::ConstraintIndex& index,
             const lp::SolveOutcome& outcome, const EssParams& params,
             const Tariff& tariff, double tol = 1e-8);

// Where the balance multiplier in a certificate came from.
//
// At a step with positive grid draw (or under net metering) the grid
// stationarity row pins the balance multiplier to the energy price. With
// zero grid draw and curtailment strictly below the available solar, the
// curtailment condition substitutes the curtailment lower-bound multiplier,
// which is nonnegative. Only when the grid is idle and all solar is
// curtailed does the certificate fall back to the balance dual itself,
// whose sign is unconstrained; totals from that source carry no positivity
// guarantee.
enum class MuSource { EnergyPrice, CurtailmentDual, BalanceDual };

const char* to_string(MuSource source);

// Lower bound on the combined stationarity identity at a step that both
// charges and discharges. Writing r = eta_d/eta_c, the identity forces
//   w*(beta + r*alpha) + lam_dis_upper + r*lam_ch_upper + (r-1)*mu == 0
// at any point satisfying the optimality conditions (w is dt when the
// tariff weights cost by energy, else 1). Every term except possibly the
// last is nonnegative, so a positive total is a contradiction: the step
// cannot appear in any optimal solution.
struct Certificate {
  int step = 0;
  MuSource mu_source = MuSource::EnergyPrice;
  double mu_value = 0.0;  // balance multiplier or its named substitute

  double penalty_sum = 0.0;               // w * (beta + r*alpha)
  double discharge_multiplier = 0.0;      // upper-bound multiplier on p_dis
  double scaled_charge_multiplier = 0.0;  // r * upper-bound multiplier on p_ch
  double price_term = 0.0;                // (r - 1) * mu_value

  double total() const {
    return penalty_sum + discharge_multiplier + scaled_charge_multiplier + price_term;
  }
};

// Builds the certificate for step tau of outcome. Requires simultaneity:
// min(p_ch, p_dis) at tau must exceed tol, else std::invalid_argument.
// The profile decides which multiplier substitutes for mu (see MuSource).
Certificate certificate_of_suboptimality(int tau, const lp::ConstraintIndex& index,
                                         const lp::SolveOutcome& outcome,
                                         const EssParams& params, const Tariff& tariff,
                                         const ExogenousProfile& prof, double tol = 1e-7);

enum class Regime { NonSimultaneous, SimultaneousPossible };

const char* to_string(Regime regime);

struct RegimeReport {
  Regime regime = Regime::SimultaneousPossible;
  std::string reason;
};

// Predicts from the tariff alone whether optimal dispatch can ever charge
// and discharge in the same step. Battery-use penalties rule it out, as
// does net metering with strictly positive prices; otherwise the optimal
// face may contain simultaneous points (they are never strictly better,
// merely not excluded).
RegimeReport classify_regime(const Tariff& tariff);

} // namespace hems::kkt
