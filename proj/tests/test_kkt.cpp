#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hems/kkt.hpp"
#include "support/fixtures.hpp"

using namespace hems;

namespace {

constexpr double kRoundtrip = 1.0 / (0.95 * 0.95);  // eta_d/eta_c for the reference battery

// Solves P1 for the given inputs, requiring optimality.
lp::SolveOutcome solve_p1(const EssParams& params, const ExogenousProfile& prof,
                          const Tariff& tariff, lp::P1& p1_out) {
  p1_out = lp::build_p1(params, prof, tariff);
  lp::SolveOutcome out = lp::solve(p1_out.lp);
  REQUIRE(out.status == lp::SolveStatus::Optimal);
  return out;
}

// An outcome shaped like a solver result but with every multiplier zero,
// for exercising the checker and certificate on hand-built points.
lp::SolveOutcome fabricated_outcome(const DecisionTrajectory& x,
                                    const lp::ConstraintIndex& index) {
  lp::SolveOutcome out;
  out.status = lp::SolveStatus::Optimal;
  out.x = lp::pack_trajectory(x);
  out.dual_ineq.assign(index.num_ineq_rows(), 0.0);
  out.dual_eq.assign(index.num_eq_rows(), 0.0);
  return out;
}

} // namespace

TEST_CASE("solver outcome passes the full optimality check") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {0.0, 2.5, 1.0};
  prof.p_load = {1.0, 0.5, 2.0};
  const Tariff tariff = fixtures::flat_tariff(3, 0.11, 0.001, 0.001);

  lp::P1 p1;
  const lp::SolveOutcome out = solve_p1(params, prof, tariff, p1);
  const kkt::Report rep = kkt::check(p1.lp, p1.index, out, params, tariff);

  CHECK(rep.pass);
  CHECK(rep.max_residual() <= rep.tolerance);
  CHECK(rep.primal_residual >= 0.0);
  CHECK(rep.stationarity_grid.size() == 3);
  CHECK(rep.stationarity_curtail.size() == 3);
}

TEST_CASE("random instances pass across tariff variants") {
  const EssParams params = fixtures::default_ess();
  std::mt19937 rng(7101);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const ExogenousProfile prof = fixtures::random_profile(rng, n);
    Tariff tariff = fixtures::flat_tariff(n, 0.05 + 0.001 * static_cast<double>(trial));
    switch (trial % 4) {
      case 0: tariff.alpha = 0.001; break;
      case 1: tariff.beta = 0.002; break;
      case 2: tariff.net_metering = true; break;
      case 3: tariff.energy_weighted_cost = true; break;
    }

    lp::P1 p1;
    const lp::SolveOutcome out = solve_p1(params, prof, tariff, p1);
    const kkt::Report rep = kkt::check(p1.lp, p1.index, out, params, tariff);
    CAPTURE(trial);
    CHECK(rep.pass);
  }
}

TEST_CASE("perturbing one balance multiplier shows up in exactly that step") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {0.5, 2.0, 0.0, 1.0};
  prof.p_load = {1.0, 1.5, 0.5, 0.8};
  const Tariff tariff = fixtures::flat_tariff(4, 0.11, 0.001, 0.001);

  lp::P1 p1;
  lp::SolveOutcome out = solve_p1(params, prof, tariff, p1);
  const int t = 2;
  out.dual_eq[t] += 0.01;
  const kkt::Report rep = kkt::check(p1.lp, p1.index, out, params, tariff);

  CHECK_FALSE(rep.pass);
  // The balance multiplier of step t enters all four stationarity rows of
  // step t and no row of any other step.
  CHECK(rep.stationarity_grid[t] >= 0.01 - 1e-9);
  CHECK(rep.stationarity_charge[t] >= 0.01 - 1e-9);
  CHECK(rep.stationarity_discharge[t] >= 0.01 - 1e-9);
  CHECK(rep.stationarity_curtail[t] >= 0.01 - 1e-9);
  for (int s = 0; s < 4; ++s) {
    if (s == t) continue;
    CAPTURE(s);
    CHECK(rep.stationarity_grid[s] <= rep.tolerance);
    CHECK(rep.stationarity_charge[s] <= rep.tolerance);
    CHECK(rep.stationarity_discharge[s] <= rep.tolerance);
    CHECK(rep.stationarity_curtail[s] <= rep.tolerance);
  }
}

TEST_CASE("infeasible primal with zero duals reports the worst violation") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {1.0, 1.0};
  prof.p_load = {1.0, 1.0};
  const Tariff tariff = fixtures::flat_tariff(2);
  const lp::P1 p1 = lp::build_p1(params, prof, tariff);

  DecisionTrajectory x = fixtures::passive_trajectory(prof);
  x.p_ch[1] = 4.0;  // breaks the 3 kW box and the balance row
  const lp::SolveOutcome out = fabricated_outcome(x, p1.index);

  const kkt::Report rep = kkt::check(p1.lp, p1.index, out, params, tariff);
  const FeasibilityReport feas = check_feasible(params, prof, tariff, x);

  CHECK_FALSE(rep.pass);
  CHECK_FALSE(feas.feasible);
  CHECK(std::abs(rep.primal_residual - feas.max_violation) <= 1e-12);
  CHECK(rep.slackness_residual == 0.0);  // all multipliers are zero
  CHECK(rep.dual_residual == 0.0);
}

TEST_CASE("net metering drops the grid bound from the grid condition") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {3.0, 0.0};
  prof.p_load = {0.5, 1.0};
  const Tariff tariff = fixtures::flat_tariff(2, 0.11, 0.0, 0.0, /*net_metering=*/true);

  lp::P1 p1;
  const lp::SolveOutcome out = solve_p1(params, prof, tariff, p1);
  const kkt::Report rep = kkt::check(p1.lp, p1.index, out, params, tariff);

  CHECK(rep.pass);
  // With the grid unconstrained in sign, its stationarity row pins the
  // balance multiplier to the price exactly.
  for (int t = 0; t < 2; ++t) {
    CAPTURE(t);
    CHECK(std::abs(out.dual_eq[t] - 0.11) <= rep.tolerance);
  }
}

TEST_CASE("checker rejects misshapen inputs") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {1.0};
  prof.p_load = {1.0};
  const Tariff tariff = fixtures::flat_tariff(1);

  lp::P1 p1;
  lp::SolveOutcome out = solve_p1(params, prof, tariff, p1);

  lp::SolveOutcome no_duals = out;
  no_duals.dual_ineq.pop_back();
  CHECK_THROWS_AS(kkt::check(p1.lp, p1.index, no_duals, params, tariff),
                  std::invalid_argument);

  lp::SolveOutcome no_eq = out;
  no_eq.dual_eq.clear();
  CHECK_THROWS_AS(kkt::check(p1.lp, p1.index, no_eq, params, tariff),
                  std::invalid_argument);

  lp::SolveOutcome wrong_status = out;
  wrong_status.status = lp::SolveStatus::IterationLimit;
  CHECK_THROWS_AS(kkt::check(p1.lp, p1.index, wrong_status, params, tariff),
                  std::invalid_argument);
}

TEST_CASE("certificate with positive grid draw and slack boxes") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {0.0};
  prof.p_load = {1.0};
  Tariff tariff = fixtures::flat_tariff(1, 0.11, 0.001, 0.0);
  const lp::ConstraintIndex index(1, false);

  // Candidate point charging and discharging at once while buying power.
  DecisionTrajectory x = fixtures::zero_trajectory(1);
  x.p_ch[0] = 1.0;
  x.p_dis[0] = 1.0;
  x.p_grid[0] = 1.0;
  const lp::SolveOutcome out = fabricated_outcome(x, index);

  const kkt::Certificate cert =
      kkt::certificate_of_suboptimality(0, index, out, params, tariff, prof);

  CHECK(cert.mu_source == kkt::MuSource::EnergyPrice);
  const double expected = kRoundtrip * 0.001 + (kRoundtrip - 1.0) * 0.11;
  CHECK(std::abs(cert.total() - expected) <= 1e-15);
  CHECK(std::abs(cert.total() - 0.012991) <= 1e-6);
  CHECK(cert.discharge_multiplier == 0.0);
  CHECK(cert.scaled_charge_multiplier == 0.0);

  SUBCASE("without penalties the price term alone stays positive") {
    tariff.alpha = 0.0;
    const kkt::Certificate price_only =
        kkt::certificate_of_suboptimality(0, index, out, params, tariff, prof);
    CHECK(price_only.total() >= 0.011883);
    CHECK(std::abs(price_only.total() - (kRoundtrip - 1.0) * 0.11) <= 1e-15);
  }
}

TEST_CASE("certificate with idle grid and partial curtailment can be zero") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {2.0};
  prof.p_load = {1.0};
  const Tariff tariff = fixtures::flat_tariff(1, 0.11, 0.0, 0.0);
  const lp::ConstraintIndex index(1, false);

  DecisionTrajectory x = fixtures::zero_trajectory(1);
  x.p_ch[0] = 1.0;
  x.p_dis[0] = 1.0;
  x.p_c[0] = 1.0;  // strictly below the 2 kW available
  const lp::SolveOutcome out = fabricated_outcome(x, index);

  const kkt::Certificate cert =
      kkt::certificate_of_suboptimality(0, index, out, params, tariff, prof);
  CHECK(cert.mu_source == kkt::MuSource::CurtailmentDual);
  CHECK(cert.mu_value == 0.0);
  CHECK(cert.total() == 0.0);  // no contradiction: simultaneity may be optimal here
}

TEST_CASE("certificate falls back to the balance dual under full curtailment") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {2.0};
  prof.p_load = {2.0};
  const Tariff tariff = fixtures::flat_tariff(1, 0.11, 0.0, 0.0);
  const lp::ConstraintIndex index(1, false);

  DecisionTrajectory x = fixtures::zero_trajectory(1);
  x.p_ch[0] = 1.0;
  x.p_dis[0] = 1.0;
  x.p_c[0] = 2.0;  // all solar curtailed, grid idle
  lp::SolveOutcome out = fabricated_outcome(x, index);
  out.dual_eq[0] = -0.05;

  const kkt::Certificate cert =
      kkt::certificate_of_suboptimality(0, index, out, params, tariff, prof);
  CHECK(cert.mu_source == kkt::MuSource::BalanceDual);
  CHECK(std::abs(cert.mu_value - -0.05) <= 1e-15);
  CHECK(cert.total() < 0.0);  // no positivity guarantee from this source
}

TEST_CASE("certificate requires actual simultaneity") {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = {0.0};
  prof.p_load = {1.0};
  const Tariff tariff = fixtures::flat_tariff(1);
  const lp::ConstraintIndex index(1, false);

  const lp::SolveOutcome out =
      fabricated_outcome(fixtures::passive_trajectory(prof), index);
  CHECK_THROWS_AS(kkt::certificate_of_suboptimality(0, index, out, params, tariff, prof),
                  std::invalid_argument);
  CHECK_THROWS_AS(kkt::certificate_of_suboptimality(5, index, out, params, tariff, prof),
                  std::out_of_range);
}

TEST_CASE("certificate lower bound under randomized penalty draws") {
  std::mt19937 rng(40921);
  std::uniform_real_distribution<double> upen(0.0, 0.01);
  std::uniform_real_distribution<double> uprice(0.01, 0.5);
  std::uniform_real_distribution<double> ueta(0.80, 0.99);

  for (int trial = 0; trial < 200; ++trial) {
    EssParams params = fixtures::default_ess();
    params.eta_c = ueta(rng);
    params.eta_d = 1.0 / params.eta_c;
    const double r = params.eta_d / params.eta_c;

    const double price = uprice(rng);
    Tariff tariff = fixtures::flat_tariff(1, price);
    if (trial % 2 == 0) {
      // Penalties active, export forbidden.
      tariff.alpha = upen(rng);
      tariff.beta = upen(rng);
      if (tariff.alpha + tariff.beta == 0.0) tariff.alpha = 1e-6;
    } else {
      // No penalties, export allowed at a positive price.
      tariff.net_metering = true;
    }

    ExogenousProfile prof;
    prof.p_sol = {0.0};
    prof.p_load = {1.0};
    DecisionTrajectory x = fixtures::zero_trajectory(1);
    x.p_ch[0] = 0.5;
    x.p_dis[0] = 0.5;
    x.p_grid[0] = 1.0;
    const lp::ConstraintIndex index(1, tariff.net_metering);
    const lp::SolveOutcome out = fabricated_outcome(x, index);

    const kkt::Certificate cert =
        kkt::certificate_of_suboptimality(0, index, out, params, tariff, prof);
    CAPTURE(trial);
    CHECK(cert.total() >= (r - 1.0) * price - 1e-12);
    CHECK(cert.total() > 0.0);
  }
}

TEST_CASE("regime classification follows the tariff") {
  Tariff t = fixtures::flat_tariff(4, 0.11, 0.001, 0.0);
  CHECK(kkt::classify_regime(t).regime == kkt::Regime::NonSimultaneous);

  t = fixtures::flat_tariff(4, 0.11);
  CHECK(kkt::classify_regime(t).regime == kkt::Regime::SimultaneousPossible);

  t = fixtures::flat_tariff(4, 0.11, 0.0, 0.0, /*net_metering=*/true);
  CHECK(kkt::classify_regime(t).regime == kkt::Regime::NonSimultaneous);

  t = fixtures::flat_tariff(4, 0.11, 0.0, 0.0, /*net_metering=*/true);
  t.c_e[2] = 0.0;  // a free period breaks the export argument
  const kkt::RegimeReport rep = kkt::classify_regime(t);
  CHECK(rep.regime == kkt::Regime::SimultaneousPossible);
  CHECK_FALSE(rep.reason.empty());

  // Penalties dominate every other feature of the tariff.
  t.alpha = 0.001;
  CHECK(kkt::classify_regime(t).regime == kkt::Regime::NonSimultaneous);
}

TEST_CASE("zero-price export period stays clean when penalties are on") {
  const EssParams params = fixtures::default_ess();
  std::mt19937 rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    const ExogenousProfile prof = fixtures::random_profile(rng, n, 4.0, 1.5);
    Tariff tariff = fixtures::flat_tariff(n, 0.11, 0.001, 0.001, /*net_metering=*/true);
    tariff.c_e[1] = 0.0;
    tariff.c_e[4] = 0.0;

    lp::P1 p1;
    const lp::SolveOutcome out = solve_p1(params, prof, tariff, p1);
    const DecisionTrajectory x = lp::extract_trajectory(out.x, n);
    CAPTURE(trial);
    for (double v : simultaneity_index(x)) CHECK(v <= 1e-7);
    CHECK(kkt::check(p1.lp, p1.index, out, params, tariff).pass);
  }
}
