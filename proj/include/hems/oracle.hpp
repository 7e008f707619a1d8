#pragma once

// Brute-force reference solver for tiny horizons. Charge, discharge and
// curtailment are restricted to multiples of a step size; grid power is
// recovered from the power balance, so the search runs over three discrete
// dimensions per step instead of four. The returned objective is the exact
// minimum over that grid, which sits above the LP optimum by at most
// error_bound(): rounding any feasible point down to the grid perturbs the
// purchase at each step by less than one step and only shrinks the battery
// terms.
//
// The complementarity variant additionally rejects any step that charges
// and discharges at once, turning the search into the nonconvex dispatch
// problem the LP relaxes. Comparing the two objectives measures what that
// restriction actually costs.

#include <vector>

#include "hems/model.hpp"

namespace hems::oracle {

// Discretization of the search.
struct GridSpec {
  double step = 0.05;  // kW between adjacent grid values, > 0

  void validate() const;

  // Worst-case objective excess of the grid minimum over the true optimum:
  // (sum over steps of c_e + alpha + beta) * step, scaled by dt when the
  // tariff prices energy rather than per-step power.
  double error_bound(const Tariff& tariff, double dt = 1.0) const;
};

struct EnumerationResult {
  DecisionTrajectory x;  // minimum-cost feasible grid point
  double objective = 0.0;
};

// Exhaustively searches the grid and returns the cheapest feasible point.
//
// Horizons above three steps are rejected (std::invalid_argument): the
// search is exponential in the horizon and exists to cross-check other
// components, not to scale. Throws std::runtime_error when no grid point
// is feasible, which can happen when the solar peak is not a multiple of
// the step and a full battery leaves curtailment as the only outlet.
EnumerationResult enumerate(const EssParams& params,
                            const ExogenousProfile& prof,
                            const Tariff& tariff,
                            const GridSpec& grid,
                            bool enforce_complementarity);

} // namespace hems::oracle
