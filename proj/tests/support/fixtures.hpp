#pragma once

// Shared builders for tests: a reference battery, tariffs and randomized
// profiles. Every random draw takes an explicit engine so tests stay
// reproducible.

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "hems/model.hpp"

namespace fixtures {

// 5 kWh battery operated in a 15..85% window, 3 kW converter, half-filled.
inline hems::EssParams default_ess() {
  hems::EssParams p;
  p.e_min = 0.75;
  p.e_max = 4.25;
  p.e0 = 2.0;
  p.p_ch_max = 3.0;
  p.p_dis_max = 3.0;
  p.eta_c = 0.95;
  p.eta_d = 1.0 / 0.95;
  p.dt = 1.0;
  return p;
}

inline hems::Tariff flat_tariff(int n, double price = 0.11, double alpha = 0.0,
                                double beta = 0.0, bool net_metering = false) {
  hems::Tariff t;
  t.c_e.assign(n, price);
  t.alpha = alpha;
  t.beta = beta;
  t.net_metering = net_metering;
  return t;
}

inline hems::ExogenousProfile random_profile(std::mt19937& rng, int n,
                                             double sol_max = 3.0, double load_max = 2.0) {
  std::uniform_real_distribution<double> usol(0.0, sol_max);
  std::uniform_real_distribution<double> uload(0.0, load_max);
  hems::ExogenousProfile prof;
  prof.p_sol.resize(n);
  prof.p_load.resize(n);
  for (int t = 0; t < n; ++t) {
    prof.p_sol[t] = usol(rng);
    prof.p_load[t] = uload(rng);
  }
  return prof;
}

inline hems::DecisionTrajectory zero_trajectory(int n) {
  hems::DecisionTrajectory x;
  x.p_grid.assign(n, 0.0);
  x.p_ch.assign(n, 0.0);
  x.p_dis.assign(n, 0.0);
  x.p_c.assign(n, 0.0);
  return x;
}

// A feasible point for any profile: no battery use, all solar curtailed,
// load served from the grid.
inline hems::DecisionTrajectory passive_trajectory(const hems::ExogenousProfile& prof) {
  const int n = static_cast<int>(prof.size());
  hems::DecisionTrajectory x = zero_trajectory(n);
  for (int t = 0; t < n; ++t) {
    x.p_c[t] = prof.p_sol[t];
    x.p_grid[t] = prof.p_load[t];
  }
  return x;
}

// Adds the same amount to charge and discharge at one step, keeping the
// power balance intact. Matched charge/discharge drains (eta_d - eta_c)*dt
// of stored energy per unit, so the amount is capped by the box headroom on
// both sides and by the stored-energy floor over the remaining steps, then
// shrunk slightly to stay strictly inside. May add nothing when the battery
// already rides its lower bound.
inline hems::DecisionTrajectory inject_simultaneity(const hems::DecisionTrajectory& x,
                                                    const hems::EssParams& params,
                                                    int step, double amount) {
  const hems::SocTrajectory soc = hems::soc_trajectory(params, x);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = static_cast<std::size_t>(step) + 1; t < soc.e.size(); ++t)
    margin = std::min(margin, soc.e[t] - params.e_min);
  const double drain = (params.eta_d - params.eta_c) * params.dt;
  double add = std::min({amount, params.p_ch_max - x.p_ch[step],
                         params.p_dis_max - x.p_dis[step],
                         drain > 0.0 ? margin / drain : amount});
  add = std::max(add, 0.0) * 0.999;
  hems::DecisionTrajectory out = x;
  out.p_ch[step] += add;
  out.p_dis[step] += add;
  return out;
}

} // namespace fixtures
