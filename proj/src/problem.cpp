#include "hems/problem.hpp"

#include <stdexcept>
#include <string>

namespace hems::lp {

ConstraintIndex::ConstraintIndex(int horizon, bool net_metering)
    : n_(horizon), net_metering_(net_metering) {}

bool ConstraintIndex::has(ConstraintKind kind) const {
  if (kind == ConstraintKind::GridLower) return !net_metering_;
  return true;
}

int ConstraintIndex::row(ConstraintKind kind, int t) const {
  if (t < 0 || t >= n_) {
    throw std::out_of_range("ConstraintIndex: step " + std::to_string(t) +
                            " outside horizon " + std::to_string(n_));
  }
  if (!has(kind)) {
    throw std::out_of_range(
        "ConstraintIndex: grid lower bound rows do not exist under net metering");
  }
  if (kind == ConstraintKind::Balance) return t;

  // Inequality groups appear in enum order, each of size n_, with the grid
  // group dropped entirely under net metering.
  int group = static_cast<int>(kind) - static_cast<int>(ConstraintKind::GridLower);
  if (net_metering_) group -= 1;  // shift everything past the absent grid group
  return group * n_ + t;
}

int ConstraintIndex::num_ineq_rows() const { return (net_metering_ ? 8 : 9) * n_; }

P1 build_p1(const EssParams& params, const ExogenousProfile& prof, const Tariff& tariff) {
  params.validate();
  prof.validate();
  tariff.validate();
  const int n = static_cast<int>(prof.size());
  if (static_cast<int>(tariff.c_e.size()) != n) {
    throw std::invalid_argument("build_p1: price series and profile lengths differ");
  }

  P1 built;
  built.index = ConstraintIndex(n, tariff.net_metering);
  LpStandardForm& lp = built.lp;
  lp.num_vars = 4 * n;

  const double w = tariff.energy_weighted_cost ? params.dt : 1.0;
  lp.objective.assign(lp.num_vars, 0.0);
  for (int t = 0; t < n; ++t) {
    lp.objective[col_grid(n, t)] = w * tariff.c_e[t];
    lp.objective[col_ch(n, t)] = w * tariff.alpha;
    lp.objective[col_dis(n, t)] = w * tariff.beta;
  }

  lp.ineq.reserve(built.index.num_ineq_rows());
  auto bound_row = [&](int col, double sign, double rhs) {
    SparseRow row;
    row.terms.push_back({col, sign});
    row.rhs = rhs;
    lp.ineq.push_back(std::move(row));
  };

  if (!tariff.net_metering) {
    for (int t = 0; t < n; ++t) bound_row(col_grid(n, t), -1.0, 0.0);
  }
  for (int t = 0; t < n; ++t) bound_row(col_ch(n, t), -1.0, 0.0);
  for (int t = 0; t < n; ++t) bound_row(col_ch(n, t), 1.0, params.p_ch_max);
  for (int t = 0; t < n; ++t) bound_row(col_dis(n, t), -1.0, 0.0);
  for (int t = 0; t < n; ++t) bound_row(col_dis(n, t), 1.0, params.p_dis_max);

  // Stored energy after step t, unrolled:
  //   e0 + sum_{s<=t} dt*(eta_c*p_ch[s] - eta_d*p_dis[s])  in [e_min, e_max]
  const double ac = params.eta_c * params.dt;
  const double ad = params.eta_d * params.dt;
  for (int t = 0; t < n; ++t) {
    SparseRow low;  // -(stored energy) <= -e_min
    for (int s = 0; s <= t; ++s) {
      low.terms.push_back({col_ch(n, s), -ac});
      low.terms.push_back({col_dis(n, s), ad});
    }
    low.rhs = params.e0 - params.e_min;
    lp.ineq.push_back(std::move(low));
  }
  for (int t = 0; t < n; ++t) {
    SparseRow high;  // stored energy <= e_max
    for (int s = 0; s <= t; ++s) {
      high.terms.push_back({col_ch(n, s), ac});
      high.terms.push_back({col_dis(n, s), -ad});
    }
    high.rhs = params.e_max - params.e0;
    lp.ineq.push_back(std::move(high));
  }

  for (int t = 0; t < n; ++t) bound_row(col_c(n, t), -1.0, 0.0);
  for (int t = 0; t < n; ++t) bound_row(col_c(n, t), 1.0, prof.p_sol[t]);

  lp.eq.reserve(n);
  for (int t = 0; t < n; ++t) {
    SparseRow balance;
    balance.terms.push_back({col_grid(n, t), -1.0});
    balance.terms.push_back({col_ch(n, t), 1.0});
    balance.terms.push_back({col_dis(n, t), -1.0});
    balance.terms.push_back({col_c(n, t), 1.0});
    balance.rhs = prof.p_sol[t] - prof.p_load[t];
    lp.eq.push_back(std::move(balance));
  }
  return built;
}

std::vector<double> pack_trajectory(const DecisionTrajectory& x) {
  x.validate();
  const int n = static_cast<int>(x.size());
  std::vector<double> packed(4 * n);
  for (int t = 0; t < n; ++t) {
    packed[col_grid(n, t)] = x.p_grid[t];
    packed[col_ch(n, t)] = x.p_ch[t];
    packed[col_dis(n, t)] = x.p_dis[t];
    packed[col_c(n, t)] = x.p_c[t];
  }
  return packed;
}

DecisionTrajectory extract_trajectory(const std::vector<double>& x, int horizon) {
  if (static_cast<int>(x.size()) != 4 * horizon) {
    throw std::invalid_argument("extract_trajectory: vector length is not 4*horizon");
  }
  DecisionTrajectory out;
  out.p_grid.resize(horizon);
  out.p_ch.resize(horizon);
  out.p_dis.resize(horizon);
  out.p_c.resize(horizon);
  for (int t = 0; t < horizon; ++t) {
    out.p_grid[t] = x[col_grid(horizon, t)];
    out.p_ch[t] = x[col_ch(horizon, t)];
    out.p_dis[t] = x[col_dis(horizon, t)];
    out.p_c[t] = x[col_c(horizon, t)];
  }
  return out;
}

} // namespace hems::lp
