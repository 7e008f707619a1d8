#include "hems/repair.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace hems::repair {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_shapes(const DecisionTrajectory& x, const ExogenousProfile& prof) {
  x.validate();
  prof.validate();
  require(x.size() == prof.size(), "repair: trajectory and profile lengths differ");
}

// Clears roundoff dust so that a side designed to vanish is exactly zero.
double snap(double v) { return std::abs(v) < 1e-12 ? 0.0 : v; }

} // namespace

std::optional<int> detect(const DecisionTrajectory& x, double tol) {
  x.validate();
  for (int t = static_cast<int>(x.size()) - 1; t >= 0; --t)
    if (std::min(x.p_ch[t], x.p_dis[t]) > tol) return t;
  return std::nullopt;
}

double total_charging(const DecisionTrajectory& x) {
  double sum = 0.0;
  for (double v : x.p_ch) sum += v;
  return sum;
}

DecisionTrajectory repair_terminal(const DecisionTrajectory& x, int tau,
                                   const EssParams& params, const ExogenousProfile& prof,
                                   double tol) {
  params.validate();
  check_shapes(x, prof);
  const int n = static_cast<int>(x.size());
  require(tau >= 0 && tau < n, "repair_terminal: step outside the horizon");
  require(std::min(x.p_ch[tau], x.p_dis[tau]) > tol,
          "repair_terminal: step does not charge and discharge simultaneously");
  require(std::abs(x.p_grid[tau]) <= tol,
          "repair_terminal: grid power at the step must be zero");
  require(std::abs(x.p_c[tau] - prof.p_sol[tau]) <= tol,
          "repair_terminal: all solar at the step must be curtailed");
  for (int s = tau + 1; s < n; ++s)
    require(x.p_ch[s] <= tol,
            "repair_terminal: charging occurs later; use repair_forwarding");
  const double delta = x.p_dis[tau] - x.p_ch[tau];
  // With zero grid power and full curtailment the balance row reads
  // delta == p_load, so a negative delta means the input was not feasible.
  require(delta >= -tol,
          "repair_terminal: discharge below charge despite zero grid and full curtailment");

  DecisionTrajectory out = x;
  out.p_grid[tau] = 0.0;
  out.p_ch[tau] = 0.0;
  out.p_dis[tau] = std::max(delta, 0.0);
  out.p_c[tau] = prof.p_sol[tau];
  return out;
}

DecisionTrajectory repair_forwarding(const DecisionTrajectory& x, int tau, int target,
                                     const EssParams& params, const ExogenousProfile& prof,
                                     SplitPolicy policy, double tol) {
  params.validate();
  check_shapes(x, prof);
  const int n = static_cast<int>(x.size());
  require(tau >= 0 && tau < n, "repair_forwarding: step outside the horizon");
  require(target > tau && target < n, "repair_forwarding: target must follow the step");
  require(std::min(x.p_ch[tau], x.p_dis[tau]) > tol,
          "repair_forwarding: step does not charge and discharge simultaneously");
  require(x.p_dis[tau] - x.p_ch[tau] >= -tol,
          "repair_forwarding: discharge at the step must cover the charge");
  require(x.p_ch[target] > tol, "repair_forwarding: target step does not charge");
  for (int s = tau + 1; s < target; ++s)
    require(x.p_ch[s] <= tol,
            "repair_forwarding: target is not the first later charging step");
  require(x.p_dis[target] <= tol,
          "repair_forwarding: target step discharges, so the step cannot be the last "
          "simultaneous one");

  const double r = params.eta_d / params.eta_c;
  const double p = std::min(
      params.eta_c * x.p_ch[target] / (params.eta_d - params.eta_c), x.p_ch[tau]);
  const double freed = (r - 1.0) * p;  // charging removed at target, split as a + b

  const double a_max = std::max(x.p_grid[target], 0.0);
  const double b_max = std::max(prof.p_sol[target] - x.p_c[target], 0.0);
  if (a_max + b_max < freed - 1e-9)
    throw std::logic_error(
        "repair_forwarding: rebalancing the target step does not fit the grid and "
        "curtailment boxes; the input trajectory cannot have been feasible");
  double a = 0.0;
  double b = 0.0;
  if (policy == SplitPolicy::GridFirst) {
    a = std::min(a_max, freed);
    b = freed - a;
  } else {
    b = std::min(b_max, freed);
    a = freed - b;
  }

  DecisionTrajectory out = x;
  out.p_ch[tau] = snap(out.p_ch[tau] - p);
  out.p_dis[tau] -= p;
  out.p_grid[target] -= a;
  out.p_ch[target] = snap(out.p_ch[target] - freed);
  out.p_dis[target] = 0.0;
  out.p_c[target] += b;
  return out;
}

const char* to_string(RoundMethod method) {
  switch (method) {
    case RoundMethod::Terminal: return "terminal";
    case RoundMethod::Forwarding: return "forwarding";
    case RoundMethod::SymmetricRemoval: return "symmetric-removal";
    case RoundMethod::NeutralRemoval: return "neutral-removal";
  }
  return "unknown";
}

namespace {

struct Candidate {
  DecisionTrajectory x;
  RoundMethod method;
};

// Fallback: subtract the overlap from both sides. Balance is untouched,
// cost falls by (alpha + beta)*overlap, and stored energy afterwards rises
// by (eta_d - eta_c)*dt*overlap, so feasibility needs re-checking.
DecisionTrajectory symmetric_removal(const DecisionTrajectory& x, int tau) {
  const double m = std::min(x.p_ch[tau], x.p_dis[tau]);
  DecisionTrajectory out = x;
  out.p_ch[tau] = snap(out.p_ch[tau] - m);
  out.p_dis[tau] = snap(out.p_dis[tau] - m);
  return out;
}

// Fallback: remove charge and discharge in the ratio eta_d : eta_c, sized
// to zero one side, leaving stored energy identical at every step. The net
// power freed at the step is absorbed by buying less grid power first,
// then by curtailing more solar. Returns nothing when the absorption does
// not fit those boxes.
std::optional<DecisionTrajectory> neutral_removal(const DecisionTrajectory& x, int tau,
                                                  const EssParams& params,
                                                  const ExogenousProfile& prof) {
  const double r = params.eta_d / params.eta_c;
  double d_ch = 0.0;
  double d_dis = 0.0;
  if (x.p_ch[tau] <= r * x.p_dis[tau]) {
    d_ch = x.p_ch[tau];
    d_dis = x.p_ch[tau] / r;
  } else {
    d_dis = x.p_dis[tau];
    d_ch = r * x.p_dis[tau];
  }
  const double freed = d_ch - d_dis;  // > 0 because eta_d > eta_c

  const double a_max = std::max(x.p_grid[tau], 0.0);
  const double b_max = std::max(prof.p_sol[tau] - x.p_c[tau], 0.0);
  if (a_max + b_max < freed - 1e-12) return std::nullopt;
  const double a = std::min(a_max, freed);
  const double b = freed - a;

  DecisionTrajectory out = x;
  out.p_ch[tau] = snap(out.p_ch[tau] - d_ch);
  out.p_dis[tau] = snap(out.p_dis[tau] - d_dis);
  out.p_grid[tau] -= a;
  out.p_c[tau] += b;
  return out;
}

} // namespace

RepairResult repair_until_clean(const DecisionTrajectory& x, const EssParams& params,
                                const ExogenousProfile& prof, const Tariff& tariff,
                                double tol, int max_rounds) {
  params.validate();
  tariff.validate();
  check_shapes(x, prof);
  require(tariff.c_e.size() == x.size(),
          "repair_until_clean: price series length does not match the trajectory");
  const int n = static_cast<int>(x.size());
  if (max_rounds <= 0) max_rounds = n;

  const FeasibilityReport entry = check_feasible(params, prof, tariff, x, tol);
  if (!entry.feasible)
    throw InfeasibleInput("repair_until_clean: input trajectory is infeasible: " +
                          entry.violations.front().describe());

  RepairResult res;
  res.x = x;
  const double cost_in = cost(tariff, res.x, params.dt);

  while (true) {
    const std::optional<int> found = detect(res.x, tol);
    if (!found) break;
    const int tau = *found;
    if (res.rounds >= max_rounds)
      throw RepairError(
          "repair_until_clean: round budget exhausted with simultaneity left at step " +
          std::to_string(tau));

    int target = -1;  // first later charging step
    for (int s = tau + 1; s < n; ++s)
      if (res.x.p_ch[s] > tol) {
        target = s;
        break;
      }

    const double charging_before = total_charging(res.x);
    const double cost_before = cost(tariff, res.x, params.dt);
    const double cost_slack = 1e-12 * (1.0 + std::abs(cost_before));

    const bool net_discharging = res.x.p_dis[tau] - res.x.p_ch[tau] >= -tol;
    const bool grid_idle = std::abs(res.x.p_grid[tau]) <= tol;
    const bool fully_curtailed = std::abs(res.x.p_c[tau] - prof.p_sol[tau]) <= tol;

    std::vector<Candidate> candidates;
    if (target < 0 && net_discharging && grid_idle && fully_curtailed)
      candidates.push_back(
          {repair_terminal(res.x, tau, params, prof, tol), RoundMethod::Terminal});
    else if (target >= 0 && net_discharging && res.x.p_dis[target] <= tol)
      candidates.push_back({repair_forwarding(res.x, tau, target, params, prof,
                                              SplitPolicy::GridFirst, tol),
                            RoundMethod::Forwarding});
    candidates.push_back({symmetric_removal(res.x, tau), RoundMethod::SymmetricRemoval});
    if (auto neutral = neutral_removal(res.x, tau, params, prof))
      candidates.push_back({std::move(*neutral), RoundMethod::NeutralRemoval});

    bool accepted = false;
    for (Candidate& cand : candidates) {
      if (!check_feasible(params, prof, tariff, cand.x, tol).feasible) continue;
      if (cost(tariff, cand.x, params.dt) > cost_before + cost_slack) continue;
      const double removed = charging_before - total_charging(cand.x);
      if (removed <= 0.0) continue;
      res.x = std::move(cand.x);
      res.log.push_back({tau, cand.method, removed});
      ++res.rounds;
      accepted = true;
      break;
    }
    if (!accepted)
      throw RepairError("repair_until_clean: no transformation applies at step " +
                        std::to_string(tau));
  }

  res.cost_reduction = cost_in - cost(tariff, res.x, params.dt);
  if (res.cost_reduction < 0.0 && res.cost_reduction >= -1e-12 * (1.0 + std::abs(cost_in)))
    res.cost_reduction = 0.0;
  return res;
}

} // namespace hems::repair
