#pragma once

// Assembles the dispatch LP in standard form. Decision columns are laid out
// as [p_grid | p_ch | p_dis | p_c], each block one column per step. Every
// bound is emitted as an explicit inequality row (variables stay free) so
// that each constraint owns a multiplier, and the stored-energy bounds are
// written as cumulative sums of charge/discharge so the energy state never
// appears as a variable.

#include <utility>
#include <vector>

#include "hems/model.hpp"

namespace hems::lp {

enum class ConstraintKind {
  GridLower,       // -p_grid <= 0, omitted under net metering
  ChargeLower,     // -p_ch <= 0
  ChargeUpper,     //  p_ch <= p_ch_max
  DischargeLower,  // -p_dis <= 0
  DischargeUpper,  //  p_dis <= p_dis_max
  SocLower,        //  e_min - e0 + dt*sum(eta_d*p_dis - eta_c*p_ch) <= 0
  SocUpper,        //  e0 - e_max + dt*sum(eta_c*p_ch - eta_d*p_dis) <= 0
  CurtailLower,    // -p_c <= 0
  CurtailUpper,    //  p_c <= p_sol
  Balance,         //  equality: -p_grid + p_ch - p_dis + p_c = p_sol - p_load
};

struct SparseRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  double rhs = 0.0;
};

// min objective'x  s.t.  ineq rows a'x <= rhs,  eq rows a'x = rhs, x free.
struct LpStandardForm {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<SparseRow> ineq;
  std::vector<SparseRow> eq;
};

// Maps (constraint kind, step) to row positions. Inequality kinds index into
// LpStandardForm::ineq, Balance into LpStandardForm::eq. Rows are grouped by
// kind in the enum's order, each group sorted by step.
class ConstraintIndex {
public:
  ConstraintIndex() = default;
  ConstraintIndex(int horizon, bool net_metering);

  int horizon() const { return n_; }
  bool net_metering() const { return net_metering_; }

  // True when the kind is present (GridLower is absent under net metering).
  bool has(ConstraintKind kind) const;

  // Row position of (kind, step). Throws std::out_of_range for absent kinds
  // or steps outside [0, horizon).
  int row(ConstraintKind kind, int t) const;

  int num_ineq_rows() const;
  int num_eq_rows() const { return n_; }

private:
  int n_ = 0;
  bool net_metering_ = false;
};

struct P1 {
  LpStandardForm lp;
  ConstraintIndex index;
};

// Column ids for the fixed layout; n is the horizon.
inline int col_grid(int n, int t) { (void)n; return t; }
inline int col_ch(int n, int t) { return n + t; }
inline int col_dis(int n, int t) { return 2 * n + t; }
inline int col_c(int n, int t) { return 3 * n + t; }

// Builds the dispatch LP for the given battery, profile and tariff.
// Validates all inputs; the tariff's price series must match the profile
// length.
P1 build_p1(const EssParams& params, const ExogenousProfile& prof, const Tariff& tariff);

// Flattens a trajectory into the column layout and back. The two are exact
// inverses.
std::vector<double> pack_trajectory(const DecisionTrajectory& x);
DecisionTrajectory extract_trajectory(const std::vector<double>& x, int horizon);

} // namespace hems::lp
