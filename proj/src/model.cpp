#include "hems/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hems {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_nonnegative(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
}

} // namespace

void EssParams::validate() const {
  require(std::isfinite(e_min) && e_min >= 0.0, "EssParams: e_min must be finite and >= 0");
  require(std::isfinite(e_max) && e_max > e_min, "EssParams: e_max must exceed e_min");
  require(std::isfinite(e0) && e0 >= e_min && e0 <= e_max,
          "EssParams: e0 must lie within [e_min, e_max]");
  require(std::isfinite(p_ch_max) && p_ch_max >= 0.0, "EssParams: p_ch_max must be >= 0");
  require(std::isfinite(p_dis_max) && p_dis_max >= 0.0, "EssParams: p_dis_max must be >= 0");
  require(std::isfinite(eta_c) && eta_c > 0.0, "EssParams: eta_c must be > 0");
  require(std::isfinite(eta_d) && eta_d > eta_c, "EssParams: eta_d must exceed eta_c");
  require(std::isfinite(dt) && dt > 0.0, "EssParams: dt must be > 0");
}

void Tariff::validate() const {
  require(!c_e.empty(), "Tariff: price series is empty");
  require(all_finite(c_e), "Tariff: price series contains a non-finite value");
  require(all_nonnegative(c_e), "Tariff: negative prices are not supported");
  require(std::isfinite(alpha) && alpha >= 0.0, "Tariff: alpha must be >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "Tariff: beta must be >= 0");
}

void ExogenousProfile::validate() const {
  require(p_sol.size() == p_load.size(),
          "ExogenousProfile: p_sol and p_load lengths differ");
  require(!p_sol.empty(), "ExogenousProfile: profile is empty");
  require(all_finite(p_sol) && all_finite(p_load),
          "ExogenousProfile: non-finite entry");
  require(all_nonnegative(p_sol), "ExogenousProfile: p_sol must be >= 0");
  require(all_nonnegative(p_load), "ExogenousProfile: p_load must be >= 0");
}

void DecisionTrajectory::validate() const {
  const std::size_t n = p_grid.size();
  require(p_ch.size() == n && p_dis.size() == n && p_c.size() == n,
          "DecisionTrajectory: series lengths differ");
  require(all_finite(p_grid) && all_finite(p_ch) && all_finite(p_dis) && all_finite(p_c),
          "DecisionTrajectory: non-finite entry");
}

double soc_step(const EssParams& params, double e, double p_ch, double p_dis) {
  return e + params.eta_c * params.dt * p_ch - params.eta_d * params.dt * p_dis;
}

SocTrajectory soc_trajectory(const EssParams& params, const DecisionTrajectory& x) {
  x.validate();
  SocTrajectory soc;
  soc.e.reserve(x.size() + 1);
  soc.e.push_back(params.e0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    soc.e.push_back(soc_step(params, soc.e.back(), x.p_ch[t], x.p_dis[t]));
  }
  return soc;
}

std::string Violation::describe() const {
  static const char* names[] = {
      "grid export without net metering", "charge below zero",
      "charge above limit",               "discharge below zero",
      "discharge above limit",            "stored energy below minimum",
      "stored energy above maximum",      "curtailment below zero",
      "curtailment above available solar", "power balance residual",
  };
  std::ostringstream out;
  out << names[static_cast<int>(kind)] << " at step " << step << " by " << amount;
  return out.str();
}

FeasibilityReport check_feasible(const EssParams& params,
                                 const ExogenousProfile& prof,
                                 const Tariff& tariff,
                                 const DecisionTrajectory& x,
                                 double tol) {
  params.validate();
  prof.validate();
  x.validate();
  if (x.size() != prof.size()) {
    throw std::invalid_argument("check_feasible: trajectory and profile lengths differ");
  }

  FeasibilityReport report;
  auto record = [&](ViolationKind kind, int step, double amount) {
    if (amount > tol) {
      report.feasible = false;
      report.max_violation = std::max(report.max_violation, amount);
      report.violations.push_back({kind, step, amount});
    }
  };

  const SocTrajectory soc = soc_trajectory(params, x);
  for (int t = 0; t < static_cast<int>(x.size()); ++t) {
    if (!tariff.net_metering) record(ViolationKind::GridExport, t, -x.p_grid[t]);
    record(ViolationKind::ChargeBelowZero, t, -x.p_ch[t]);
    record(ViolationKind::ChargeAboveMax, t, x.p_ch[t] - params.p_ch_max);
    record(ViolationKind::DischargeBelowZero, t, -x.p_dis[t]);
    record(ViolationKind::DischargeAboveMax, t, x.p_dis[t] - params.p_dis_max);
    record(ViolationKind::SocBelowMin, t, params.e_min - soc.e[t + 1]);
    record(ViolationKind::SocAboveMax, t, soc.e[t + 1] - params.e_max);
    record(ViolationKind::CurtailBelowZero, t, -x.p_c[t]);
    record(ViolationKind::CurtailAboveSolar, t, x.p_c[t] - prof.p_sol[t]);
    const double residual = -x.p_grid[t] + prof.p_load[t] - (prof.p_sol[t] - x.p_c[t]) -
                            x.p_dis[t] + x.p_ch[t];
    record(ViolationKind::PowerBalance, t, std::abs(residual));
  }
  return report;
}

double cost(const Tariff& tariff, const DecisionTrajectory& x, double dt) {
  x.validate();
  if (tariff.c_e.size() != x.size()) {
    throw std::invalid_argument("cost: price series and trajectory lengths differ");
  }
  const double scale = tariff.energy_weighted_cost ? dt : 1.0;
  double total = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    total += scale * (tariff.c_e[t] * x.p_grid[t] + tariff.alpha * x.p_ch[t] +
                      tariff.beta * x.p_dis[t]);
  }
  return total;
}

std::vector<double> simultaneity_index(const DecisionTrajectory& x) {
  x.validate();
  std::vector<double> idx(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) idx[t] = std::min(x.p_ch[t], x.p_dis[t]);
  return idx;
}

} // namespace hems
