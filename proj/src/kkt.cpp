#include "hems/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hems::kkt {

namespace {

double row_surplus(const lp::SparseRow& row, const std::vector<double>& x) {
  double ax = 0.0;
  for (const auto& [col, coef] : row.terms) ax += coef * x[col];
  return ax - row.rhs;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

} // namespace

double Report::stationarity_residual() const {
  return std::max(std::max(max_abs(stationarity_grid), max_abs(stationarity_charge)),
                  std::max(max_abs(stationarity_discharge), max_abs(stationarity_curtail)));
}

double Report::max_residual() const {
  return std::max({primal_residual, dual_residual, slackness_residual,
                   stationarity_residual()});
}

Report check(const lp::LpStandardForm& lpf, const lp::ConstraintIndex& index,
             const lp::SolveOutcome& outcome, const EssParams& params,
             const Tariff& tariff, double tol) {
  using lp::ConstraintKind;

  if (outcome.status != lp::SolveStatus::Optimal)
    throw std::invalid_argument("kkt::check: outcome is not optimal");
  const int n = index.horizon();
  if (static_cast<int>(outcome.x.size()) != lpf.num_vars)
    throw std::invalid_argument("kkt::check: primal vector does not match the LP");
  if (outcome.dual_ineq.size() != lpf.ineq.size() ||
      static_cast<int>(lpf.ineq.size()) != index.num_ineq_rows())
    throw std::invalid_argument("kkt::check: inequality duals missing or misshapen");
  if (outcome.dual_eq.size() != lpf.eq.size() ||
      static_cast<int>(lpf.eq.size()) != index.num_eq_rows())
    throw std::invalid_argument("kkt::check: equality duals missing or misshapen");
  if (static_cast<int>(tariff.c_e.size()) != n)
    throw std::invalid_argument("kkt::check: price series does not match the horizon");

  Report rep;

  double data_norm =
      std::max({max_abs(lpf.objective), max_abs(outcome.dual_ineq), max_abs(outcome.dual_eq)});
  auto absorb_row = [&data_norm](const lp::SparseRow& row) {
    for (const auto& [col, coef] : row.terms) {
      (void)col;
      data_norm = std::max(data_norm, std::abs(coef));
    }
    data_norm = std::max(data_norm, std::abs(row.rhs));
  };

  for (std::size_t i = 0; i < lpf.ineq.size(); ++i) {
    absorb_row(lpf.ineq[i]);
    const double surplus = row_surplus(lpf.ineq[i], outcome.x);
    rep.primal_residual = std::max(rep.primal_residual, surplus);
    rep.dual_residual = std::max(rep.dual_residual, -outcome.dual_ineq[i]);
    rep.slackness_residual =
        std::max(rep.slackness_residual, std::abs(outcome.dual_ineq[i] * surplus));
  }
  for (std::size_t i = 0; i < lpf.eq.size(); ++i) {
    absorb_row(lpf.eq[i]);
    rep.primal_residual =
        std::max(rep.primal_residual, std::abs(row_surplus(lpf.eq[i], outcome.x)));
  }

  const double w = tariff.energy_weighted_cost ? params.dt : 1.0;
  auto lam = [&](ConstraintKind kind, int t) {
    return lp::dual_by_constraint(outcome, index, kind, t);
  };

  // soc_suffix[t] = sum over steps s >= t of (upper - lower) stored-energy
  // multipliers; a unit of charge at step t shifts every later energy level,
  // so its stationarity row sees the whole suffix.
  std::vector<double> soc_suffix(n + 1, 0.0);
  for (int t = n - 1; t >= 0; --t)
    soc_suffix[t] = soc_suffix[t + 1] + lam(ConstraintKind::SocUpper, t) -
                    lam(ConstraintKind::SocLower, t);

  rep.stationarity_grid.resize(n);
  rep.stationarity_charge.resize(n);
  rep.stationarity_discharge.resize(n);
  rep.stationarity_curtail.resize(n);
  for (int t = 0; t < n; ++t) {
    const double mu = outcome.dual_eq[t];

    double grid = w * tariff.c_e[t] - mu;
    if (index.has(ConstraintKind::GridLower)) grid -= lam(ConstraintKind::GridLower, t);
    rep.stationarity_grid[t] = std::abs(grid);

    rep.stationarity_charge[t] =
        std::abs(w * tariff.alpha - lam(ConstraintKind::ChargeLower, t) +
                 lam(ConstraintKind::ChargeUpper, t) +
                 params.eta_c * params.dt * soc_suffix[t] + mu);

    rep.stationarity_discharge[t] =
        std::abs(w * tariff.beta - lam(ConstraintKind::DischargeLower, t) +
                 lam(ConstraintKind::DischargeUpper, t) -
                 params.eta_d * params.dt * soc_suffix[t] - mu);

    rep.stationarity_curtail[t] =
        std::abs(-lam(ConstraintKind::CurtailLower, t) +
                 lam(ConstraintKind::CurtailUpper, t) + mu);
  }

  rep.tolerance = tol * (1.0 + data_norm);
  rep.pass = rep.max_residual() <= rep.tolerance;
  return rep;
}

const char* to_string(MuSource source) {
  switch (source) {
    case MuSource::EnergyPrice: return "energy-price";
    case MuSource::CurtailmentDual: return "curtailment-dual";
    case MuSource::BalanceDual: return "balance-dual";
  }
  return "unknown";
}

Certificate certificate_of_suboptimality(int tau, const lp::ConstraintIndex& index,
                                         const lp::SolveOutcome& outcome,
                                         const EssParams& params, const Tariff& tariff,
                                         const ExogenousProfile& prof, double tol) {
  using lp::ConstraintKind;

  const int n = index.horizon();
  if (tau < 0 || tau >= n)
    throw std::out_of_range("certificate_of_suboptimality: step outside the horizon");
  if (static_cast<int>(prof.p_sol.size()) != n ||
      static_cast<int>(tariff.c_e.size()) != n)
    throw std::invalid_argument(
        "certificate_of_suboptimality: profile or tariff does not match the horizon");

  const DecisionTrajectory x = lp::extract_trajectory(outcome.x, n);
  if (std::min(x.p_ch[tau], x.p_dis[tau]) <= tol)
    throw std::invalid_argument(
        "certificate_of_suboptimality: step does not charge and discharge simultaneously");

  const double w = tariff.energy_weighted_cost ? params.dt : 1.0;
  const double r = params.eta_d / params.eta_c;

  Certificate cert;
  cert.step = tau;
  if (tariff.net_metering || x.p_grid[tau] > tol) {
    // The grid stationarity row makes the balance multiplier equal the
    // (weighted) price outright under net metering; with positive grid draw
    // the same follows because the grid lower bound is slack.
    cert.mu_source = MuSource::EnergyPrice;
    cert.mu_value = w * tariff.c_e[tau];
  } else if (x.p_c[tau] < prof.p_sol[tau] - tol) {
    // Curtailment sits strictly inside its box on the upper side, so the
    // curtailment stationarity row gives mu = lower-bound multiplier >= 0.
    cert.mu_source = MuSource::CurtailmentDual;
    cert.mu_value = lp::dual_by_constraint(outcome, index, ConstraintKind::CurtailLower, tau);
  } else {
    cert.mu_source = MuSource::BalanceDual;
    cert.mu_value = lp::dual_by_constraint(outcome, index, ConstraintKind::Balance, tau);
  }

  cert.penalty_sum = w * (tariff.beta + r * tariff.alpha);
  cert.discharge_multiplier =
      lp::dual_by_constraint(outcome, index, ConstraintKind::DischargeUpper, tau);
  cert.scaled_charge_multiplier =
      r * lp::dual_by_constraint(outcome, index, ConstraintKind::ChargeUpper, tau);
  cert.price_term = (r - 1.0) * cert.mu_value;
  return cert;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::NonSimultaneous: return "non-simultaneous";
    case Regime::SimultaneousPossible: return "simultaneous-possible";
  }
  return "unknown";
}

RegimeReport classify_regime(const Tariff& tariff) {
  tariff.validate();
  const double min_price = *std::min_element(tariff.c_e.begin(), tariff.c_e.end());
  if (tariff.alpha + tariff.beta > 0.0)
    return {Regime::NonSimultaneous,
            "battery-use penalties are positive; any simultaneous step can be "
            "shrunk at a strict saving"};
  if (tariff.net_metering && min_price > 0.0)
    return {Regime::NonSimultaneous,
            "export is credited at strictly positive prices, so wasting solar "
            "in simultaneous operation forgoes revenue"};
  if (tariff.net_metering)
    return {Regime::SimultaneousPossible,
            "the price reaches zero, so exported energy can be worthless and "
            "simultaneous operation costs nothing extra"};
  return {Regime::SimultaneousPossible,
          "no penalties and no export credit; excess solar has no value and "
          "simultaneous operation can sit on the optimal face"};
}

} // namespace hems::kkt
