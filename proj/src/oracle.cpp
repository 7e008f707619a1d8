#include "hems/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hems::oracle {

namespace {

// Absorbs the rounding noise of i*step arithmetic when testing stored-energy
// bounds and curtailment limits; three orders below any physical tolerance.
constexpr double kSlack = 1e-9;

struct Search {
  const EssParams& params;
  const ExogenousProfile& prof;
  const Tariff& tariff;
  double step;
  bool comp;
  int n;
  double w;              // cost weight per step: dt when energy-priced, else 1
  int ch_top, dis_top;   // highest grid index for each battery variable
  std::vector<double> suffix_lb;  // lower bound on cost from step t onward

  DecisionTrajectory cur;
  DecisionTrajectory best;
  double best_cost = std::numeric_limits<double>::infinity();

  Search(const EssParams& p, const ExogenousProfile& pr, const Tariff& ta,
         double s, bool c)
      : params(p), prof(pr), tariff(ta), step(s), comp(c),
        n(static_cast<int>(pr.size())) {
    w = tariff.energy_weighted_cost ? params.dt : 1.0;
    ch_top = static_cast<int>(std::floor(params.p_ch_max / step + kSlack));
    dis_top = static_cast<int>(std::floor(params.p_dis_max / step + kSlack));

    // Without net metering every cost term is non-negative, so zero is a
    // valid tail bound. With export the purchase term can go negative, at
    // worst by the full discharge rate against the price.
    suffix_lb.assign(n + 1, 0.0);
    for (int t = n - 1; t >= 0; --t) {
      double lb = 0.0;
      if (tariff.net_metering) {
        const double sell = prof.p_load[t] - prof.p_sol[t] - dis_top * step;
        lb = w * tariff.c_e[t] * std::min(0.0, sell);
      }
      suffix_lb[t] = suffix_lb[t + 1] + lb;
    }

    cur.p_grid.assign(n, 0.0);
    cur.p_ch.assign(n, 0.0);
    cur.p_dis.assign(n, 0.0);
    cur.p_c.assign(n, 0.0);
  }

  void dfs(int t, double e, double partial) {
    if (t == n) {
      if (partial < best_cost) {
        best_cost = partial;
        best = cur;
      }
      return;
    }
    const double sol = prof.p_sol[t];
    const double load = prof.p_load[t];
    for (int ich = 0; ich <= ch_top; ++ich) {
      const double p_ch = ich * step;
      for (int idis = 0; idis <= dis_top; ++idis) {
        if (comp && ich > 0 && idis > 0) break;
        const double p_dis = idis * step;

        const double e_next = e + params.eta_c * params.dt * p_ch -
                              params.eta_d * params.dt * p_dis;
        if (e_next < params.e_min - kSlack) break;  // deeper discharge only sinks further
        if (e_next > params.e_max + kSlack) continue;

        // Grid power before curtailment; the cheapest admissible
        // curtailment is the smallest grid multiple that keeps the
        // purchase sign legal, since larger values only buy more.
        const double base = load - sol + p_ch - p_dis;
        double p_c = 0.0;
        if (!tariff.net_metering && base < 0.0) {
          const int ic = static_cast<int>(std::ceil(-base / step - kSlack));
          p_c = ic * step;
          if (p_c > sol + kSlack) continue;  // grid has no outlet for this solar
        }
        const double p_grid = base + p_c;

        const double partial2 =
            partial + w * (tariff.c_e[t] * p_grid + tariff.alpha * p_ch +
                           tariff.beta * p_dis);
        if (partial2 + suffix_lb[t + 1] >= best_cost) continue;

        cur.p_grid[t] = p_grid;
        cur.p_ch[t] = p_ch;
        cur.p_dis[t] = p_dis;
        cur.p_c[t] = p_c;
        dfs(t + 1, e_next, partial2);
      }
    }
  }
};

} // namespace

void GridSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("grid step must be positive and finite");
}

double GridSpec::error_bound(const Tariff& tariff, double dt) const {
  validate();
  const double w = tariff.energy_weighted_cost ? dt : 1.0;
  double sum = 0.0;
  for (double ce : tariff.c_e) sum += w * (ce + tariff.alpha + tariff.beta);
  return sum * step;
}

EnumerationResult enumerate(const EssParams& params, const ExogenousProfile& prof,
                            const Tariff& tariff, const GridSpec& grid,
                            bool enforce_complementarity) {
  params.validate();
  prof.validate();
  tariff.validate();
  grid.validate();
  const int n = static_cast<int>(prof.size());
  if (n < 1 || n > 3)
    throw std::invalid_argument("enumeration horizon must be 1 to 3 steps, got " +
                                std::to_string(n));
  if (tariff.c_e.size() != prof.size())
    throw std::invalid_argument("price series length does not match the profile");

  Search s(params, prof, tariff, grid.step, enforce_complementarity);
  s.dfs(0, params.e0, 0.0);
  if (!std::isfinite(s.best_cost))
    throw std::runtime_error("no feasible grid point at step " +
                             std::to_string(grid.step));

  // i*step arithmetic can leave the recovered purchase a few ulp negative.
  for (double& v : s.best.p_grid)
    if (std::abs(v) < 1e-12) v = 0.0;
  return {std::move(s.best), s.best_cost};
}

} // namespace hems::oracle
