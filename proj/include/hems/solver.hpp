#pragma once

// Linear programming solver for the standard form produced by build_p1:
// min c'x subject to A x <= b, A_eq x = b_eq, x free.
//
// Free variables are split into nonnegative pairs and the system is solved
// with a two-phase revised simplex (dense basis inverse, periodic
// refactorization). Pricing uses the largest-coefficient rule with
// lowest-index tie-breaking and falls back to Bland's rule after
// 10*(rows+cols) iterations, so identical inputs take identical pivot
// sequences and return identical results.
//
// Multipliers follow the Lagrangian convention
//   c + A'lambda + A_eq'mu = 0,   lambda >= 0,
// i.e. lambda is the negated simplex multiplier of an inequality row. A row
// with positive slack at the optimum carries lambda = 0. Because both halves
// of a split pair have opposite reduced costs, stationarity holds to
// round-off at any dual-feasible basis.

#include <optional>
#include <stdexcept>
#include <vector>

#include "hems/problem.hpp"

namespace hems::lp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus status);

struct SolveOptions {
  double feas_tol = 1e-9;   // phase-1 residual threshold, scaled by (1+max|b|)
  double opt_tol = 1e-9;    // reduced-cost threshold for optimality
  double pivot_tol = 1e-10; // smallest usable pivot magnitude
  int max_iterations = 0;   // 0 picks 50*(rows+cols)+200
  bool equilibrate = false; // scale rows to unit max magnitude, unscale duals
  int refactor_interval = 64;
};

// Infeasibility witness: multipliers with mult'A + eq_mult'A_eq = 0,
// mult >= 0, and mult'b + eq_mult'b_eq < 0, so no x can satisfy all rows.
struct FarkasCertificate {
  std::vector<double> ineq_mult;
  std::vector<double> eq_mult;
  std::vector<int> active_rows;  // inequality rows with multiplier above tolerance
  double gap = 0.0;              // mult'b + eq_mult'b_eq, strictly negative
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Optimal;
  std::vector<double> x;          // primal solution (Optimal only)
  double objective = 0.0;
  std::vector<double> dual_ineq;  // lambda, one per inequality row, >= 0
  std::vector<double> dual_eq;    // mu, one per equality row, free sign
  int iterations = 0;
  std::optional<FarkasCertificate> farkas;  // Infeasible only
  std::optional<std::vector<double>> ray;   // Unbounded only: c'ray < 0, feasible direction
};

// Thrown only for internal numerical failure (basis went singular); status
// codes cover every expected outcome including the iteration limit.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SolveOutcome solve(const LpStandardForm& lp, const SolveOptions& opts = {});

// Multiplier of the named constraint row. Balance rows return mu (any sign),
// everything else lambda >= 0. Throws std::out_of_range for rows absent from
// the formulation, e.g. the grid lower bound under net metering.
double dual_by_constraint(const SolveOutcome& outcome, const ConstraintIndex& index,
                          ConstraintKind kind, int t);

} // namespace hems::lp
