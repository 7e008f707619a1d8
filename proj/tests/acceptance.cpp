// Acceptance gate for the toolkit. Eight self-contained checks cover the
// behavior the library promises: the tariff-regime table, the appearance
// and removal of simultaneous charge/discharge, optimality certification,
// certificate positivity, repair soundness, brute-force agreement, solver
// performance, and export under net metering. Each prints one verdict
// line; the process exits nonzero if any of them fails.
//
// Randomized checks use fixed seeds so a failure is reproducible by
// rerunning the binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hems/kkt.hpp"
#include "hems/model.hpp"
#include "hems/mpc.hpp"
#include "hems/oracle.hpp"
#include "hems/problem.hpp"
#include "hems/repair.hpp"
#include "hems/solver.hpp"
#include "support/fixtures.hpp"

using namespace hems;

namespace {

constexpr double kOverlapTol = 1e-7;  // kW; below this a step counts as clean

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_overlap(const DecisionTrajectory& x) {
  double worst = 0.0;
  for (double v : simultaneity_index(x)) worst = std::max(worst, v);
  return worst;
}

double total_charging(const DecisionTrajectory& x) {
  double sum = 0.0;
  for (double v : x.p_ch) sum += v;
  return sum;
}

// Solves retained by the first two checks so the certification check can
// replay every one of them.
struct SolveRecord {
  lp::P1 p1;
  lp::SolveOutcome outcome;
  EssParams params;
  Tariff tariff;
};

std::vector<SolveRecord> g_solves;

// ---------------------------------------------------------------------------
// 1. Tariff-regime table: five (penalty, price, export) combinations, the
// three marked non-simultaneous must come back clean on every one of 50
// randomized profiles, inside a minute.

Verdict check_regime_table() {
  const auto start = std::chrono::steady_clock::now();
  enum PriceKind { StrictlyPositive, NonNegative, Zero };
  struct Row {
    bool penalized;       // alpha + beta > 0
    PriceKind prices;
    bool net_metering;
    bool clean_expected;  // "non-simultaneous" in the summary table
  };
  const Row rows[] = {
      {false, StrictlyPositive, true, true},
      {true, NonNegative, true, true},
      {false, Zero, true, false},
      {true, NonNegative, false, true},
      {false, NonNegative, false, false},
  };

  std::mt19937 rng(1701);
  std::uniform_real_distribution<double> upos(0.02, 0.30);
  std::uniform_real_distribution<double> uany(0.0, 0.30);
  std::uniform_real_distribution<double> upen(0.0, 0.005);
  std::uniform_real_distribution<double> uzero(0.0, 1.0);

  const EssParams params = fixtures::default_ess();
  const int kTrials = 50;
  const int kHorizon = 24;
  double worst_clean_overlap = 0.0;
  int solves = 0;

  for (int r = 0; r < 5; ++r) {
    const Row& row = rows[r];
    for (int trial = 0; trial < kTrials; ++trial) {
      Tariff tariff;
      tariff.net_metering = row.net_metering;
      tariff.c_e.resize(kHorizon);
      for (double& c : tariff.c_e) {
        switch (row.prices) {
          case StrictlyPositive: c = upos(rng); break;
          case NonNegative: c = uzero(rng) < 0.2 ? 0.0 : uany(rng); break;
          case Zero: c = 0.0; break;
        }
      }
      if (row.penalized) {
        tariff.alpha = upen(rng);
        tariff.beta = upen(rng);
        if (tariff.alpha + tariff.beta < 1e-4) tariff.alpha += 1e-4;
      }

      const kkt::RegimeReport regime = kkt::classify_regime(tariff);
      const bool predicted_clean = regime.regime == kkt::Regime::NonSimultaneous;
      if (predicted_clean != row.clean_expected)
        return {false, format("row %d trial %d: regime classifier disagrees with table (%s)",
                              r + 1, trial, kkt::to_string(regime.regime))};

      const ExogenousProfile prof = fixtures::random_profile(rng, kHorizon, 5.0, 3.0);
      lp::P1 p1 = lp::build_p1(params, prof, tariff);
      lp::SolveOutcome out = lp::solve(p1.lp);
      if (out.status != lp::SolveStatus::Optimal)
        return {false, format("row %d trial %d: solve ended %s", r + 1, trial,
                              lp::to_string(out.status))};
      ++solves;

      if (row.clean_expected) {
        const double overlap = max_overlap(lp::extract_trajectory(out.x, kHorizon));
        worst_clean_overlap = std::max(worst_clean_overlap, overlap);
        if (overlap > kOverlapTol)
          return {false, format("row %d trial %d: overlap %.3e kW exceeds %.0e", r + 1,
                                trial, overlap, kOverlapTol)};
      }
      g_solves.push_back({std::move(p1), std::move(out), params, std::move(tariff)});
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) return {false, format("took %.1f s, budget is 60 s", elapsed)};
  return {true, format("%d solves, worst overlap on clean rows %.2e kW, %.1f s", solves,
                       worst_clean_overlap, elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Oversized solar with a free battery produces at least one overlapping
// step; a 0.001 charging penalty removes every overlap at near-identical
// cost.

Verdict check_scaled_solar() {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = mpc::synthetic_solar(1.5);
  prof.p_load = mpc::synthetic_load();
  const int n = 24;

  // the premise: at some hour solar exceeds load plus all charging headroom
  bool saturated = false;
  for (int t = 0; t < n; ++t)
    saturated = saturated || prof.p_sol[t] > prof.p_load[t] + params.p_ch_max;
  if (!saturated) return {false, "profile never saturates the charging headroom"};

  Tariff free_tariff = fixtures::flat_tariff(n, 0.11);
  lp::P1 free_p1 = lp::build_p1(params, prof, free_tariff);
  lp::SolveOutcome free_out = lp::solve(free_p1.lp);
  if (free_out.status != lp::SolveStatus::Optimal) return {false, "free solve failed"};
  const DecisionTrajectory x_free = lp::extract_trajectory(free_out.x, n);

  int overlapping = 0;
  for (double v : simultaneity_index(x_free))
    if (v > kOverlapTol) ++overlapping;
  if (overlapping == 0)
    return {false, "no simultaneous step appeared despite saturated solar"};

  Tariff pen_tariff = fixtures::flat_tariff(n, 0.11, 0.001);
  lp::P1 pen_p1 = lp::build_p1(params, prof, pen_tariff);
  lp::SolveOutcome pen_out = lp::solve(pen_p1.lp);
  if (pen_out.status != lp::SolveStatus::Optimal) return {false, "penalized solve failed"};
  const DecisionTrajectory x_pen = lp::extract_trajectory(pen_out.x, n);
  const double pen_overlap = max_overlap(x_pen);
  if (pen_overlap > kOverlapTol)
    return {false, format("penalty left overlap of %.3e kW", pen_overlap)};

  // The penalized optimum can only sit above the free one, and no further
  // than the penalty collected on a cleaned-up free solution.
  const double gap = pen_out.objective - free_out.objective;
  if (gap < -1e-9) return {false, format("penalized objective fell by %.3e", -gap)};
  const repair::RepairResult cleaned =
      repair::repair_until_clean(x_free, params, prof, free_tariff);
  const double charging =
      std::max(total_charging(x_pen), total_charging(cleaned.x));
  const double cap = 1e-6 + pen_tariff.alpha * charging;
  if (gap > cap) return {false, format("objective gap %.3e exceeds %.3e", gap, cap)};

  g_solves.push_back({std::move(free_p1), std::move(free_out), params, std::move(free_tariff)});
  g_solves.push_back({std::move(pen_p1), std::move(pen_out), params, std::move(pen_tariff)});
  return {true, format("%d overlapping steps free, 0 penalized, objective gap %.2e <= %.2e",
                       overlapping, gap, cap)};
}

// ---------------------------------------------------------------------------
// 3. Every optimum collected above passes the full optimality check with
// residuals no larger than 1e-8 * (1 + |objective|).

Verdict check_certification() {
  if (g_solves.empty()) return {false, "nothing to certify (earlier checks bailed out)"};
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < g_solves.size(); ++i) {
    const SolveRecord& rec = g_solves[i];
    const kkt::Report report = kkt::check(rec.p1.lp, rec.p1.index, rec.outcome,
                                          rec.params, rec.tariff, 1e-8);
    const double cap = 1e-8 * (1.0 + std::abs(rec.outcome.objective));
    const double residual = report.max_residual();
    worst_ratio = std::max(worst_ratio, residual / cap);
    if (!report.pass)
      return {false, format("solve %zu: report failed (max residual %.3e)", i, residual)};
    if (residual > cap)
      return {false, format("solve %zu: residual %.3e above %.3e", i, residual, cap)};
  }
  return {true, format("%zu optima certified, worst residual at %.1e of its cap",
                       g_solves.size(), worst_ratio)};
}

// ---------------------------------------------------------------------------
// 4. The contradiction total of a simultaneous step is at least
// (eta_d/eta_c - 1) * c_e and strictly positive on 1000 random parameter
// draws from the ranges that guarantee non-simultaneity.

Verdict check_certificate_positivity() {
  std::mt19937 rng(8472);
  std::uniform_real_distribution<double> ueta_c(0.5, 0.98);
  std::uniform_real_distribution<double> ueta_d(1.01, 1.8);
  std::uniform_real_distribution<double> uprice(0.005, 0.4);
  std::uniform_real_distribution<double> upen(0.0, 0.01);
  std::uniform_real_distribution<double> uload(1.0, 2.5);
  std::uniform_real_distribution<double> usol(0.0, 0.5);

  double min_total = std::numeric_limits<double>::infinity();
  for (int draw = 0; draw < 1000; ++draw) {
    EssParams params = fixtures::default_ess();
    params.eta_c = ueta_c(rng);
    params.eta_d = ueta_d(rng);
    const double r = params.eta_d / params.eta_c;

    Tariff tariff;
    tariff.c_e = {uprice(rng)};
    const bool exporting = draw % 2 == 1;  // alternate the two qualifying regimes
    tariff.net_metering = exporting;
    if (!exporting) {
      tariff.alpha = upen(rng);
      tariff.beta = upen(rng);
      if (tariff.alpha + tariff.beta < 1e-5) tariff.alpha += 1e-5;
    } else if (draw % 4 == 1) {
      tariff.alpha = upen(rng);  // penalties stay optional under export
      tariff.beta = upen(rng);
    }

    ExogenousProfile prof;
    prof.p_load = {uload(rng)};
    prof.p_sol = {usol(rng)};

    const lp::P1 p1 = lp::build_p1(params, prof, tariff);
    lp::SolveOutcome out = lp::solve(p1.lp);
    if (out.status != lp::SolveStatus::Optimal)
      return {false, format("draw %d: solve ended %s", draw, lp::to_string(out.status))};

    // Evaluate the certificate at an injected simultaneous point that still
    // draws from the grid, so the energy price supplies the balance multiplier.
    DecisionTrajectory x = lp::extract_trajectory(out.x, 1);
    x.p_ch[0] = 0.4;
    x.p_dis[0] = 0.3;
    x.p_c[0] = 0.0;
    x.p_grid[0] = prof.p_load[0] - prof.p_sol[0] + x.p_ch[0] - x.p_dis[0];
    out.x = lp::pack_trajectory(x);

    const kkt::Certificate cert =
        kkt::certificate_of_suboptimality(0, p1.index, out, params, tariff, prof);
    if (cert.mu_source != kkt::MuSource::EnergyPrice)
      return {false, format("draw %d: unexpected mu source %s", draw,
                            kkt::to_string(cert.mu_source))};
    const double floor = (r - 1.0) * tariff.c_e[0];
    if (cert.total() < floor - 1e-12)
      return {false, format("draw %d: total %.3e below price floor %.3e", draw,
                            cert.total(), floor)};
    if (!(cert.total() > 0.0))
      return {false, format("draw %d: total %.3e not positive", draw, cert.total())};
    min_total = std::min(min_total, cert.total());
  }
  return {true, format("1000 certificates positive, smallest total %.3e", min_total)};
}

// ---------------------------------------------------------------------------
// 5. Repair: 200 solver optima with injected overlaps come back feasible,
// clean and no costlier, shedding charging every round, within n rounds.

Verdict check_repair_soundness() {
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> uamount(0.2, 1.5);
  std::uniform_real_distribution<double> uprice(0.0, 0.2);
  const EssParams params = fixtures::default_ess();

  int strict = 0;
  int from_optimum = 0;
  int max_rounds_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 10);
    const ExogenousProfile prof = fixtures::random_profile(rng, n);
    Tariff tariff;
    switch (trial % 4) {
      case 0: tariff = fixtures::flat_tariff(n, 0.11); break;
      case 1: tariff = fixtures::flat_tariff(n, 0.11, 0.001, 0.002); break;
      case 2:
        tariff = fixtures::flat_tariff(n, 0.0, 0.0005, 0.0, true);
        for (double& c : tariff.c_e) c = uprice(rng);
        break;
      default: tariff = fixtures::flat_tariff(n, 0.11, 0.0, 0.003); break;
    }

    const lp::P1 p1 = lp::build_p1(params, prof, tariff);
    const lp::SolveOutcome out = lp::solve(p1.lp);
    if (out.status != lp::SolveStatus::Optimal)
      return {false, format("trial %d: solve ended %s", trial, lp::to_string(out.status))};

    // Overlay one to three matched charge/discharge pairs on the optimum.
    // Optima often ride the stored-energy floor, where the overlay has no
    // room; those trials restart from the passive trajectory, whose level
    // battery accepts any injection.
    const int overlaps = 1 + static_cast<int>(rng() % 3);
    DecisionTrajectory x = lp::extract_trajectory(out.x, n);
    for (int k = 0; k < 8 && !repair::detect(x).has_value(); ++k)
      x = fixtures::inject_simultaneity(x, params, static_cast<int>(rng() % n),
                                        uamount(rng));
    if (repair::detect(x).has_value()) {
      ++from_optimum;
    } else {
      x = fixtures::passive_trajectory(prof);
      for (int k = 0; k < overlaps; ++k)
        x = fixtures::inject_simultaneity(x, params, static_cast<int>(rng() % n),
                                          uamount(rng));
    }
    if (!repair::detect(x).has_value())
      return {false, format("trial %d: could not inject an overlap", trial)};
    if (!check_feasible(params, prof, tariff, x).feasible)
      return {false, format("trial %d: injection broke feasibility", trial)};

    const double cost_before = cost(tariff, x);
    const repair::RepairResult res = repair::repair_until_clean(x, params, prof, tariff);
    if (repair::detect(res.x).has_value())
      return {false, format("trial %d: output still overlaps", trial)};
    if (!check_feasible(params, prof, tariff, res.x).feasible)
      return {false, format("trial %d: output infeasible", trial)};
    if (res.rounds > n)
      return {false, format("trial %d: %d rounds for %d steps", trial, res.rounds, n)};
    if (cost(tariff, res.x) > cost_before + 1e-12 * (1.0 + std::abs(cost_before)))
      return {false, format("trial %d: cost went up", trial)};
    for (const repair::RepairRound& round : res.log)
      if (!(round.charging_removed > 0.0))
        return {false, format("trial %d: a round removed no charging", trial)};
    if (tariff.alpha + tariff.beta > 0.0) {
      if (!(res.cost_reduction > 0.0))
        return {false, format("trial %d: no strict saving under penalties", trial)};
      ++strict;
    }
    max_rounds_seen = std::max(max_rounds_seen, res.rounds);
  }
  return {true, format("200 repairs clean (%d strictly cheaper, %d seeded from optima),"
                       " max %d rounds", strict, from_optimum, max_rounds_seen)};
}

// ---------------------------------------------------------------------------
// 6. Brute force agrees with the LP within the grid error bound on 20
// random two-step instances, and the complementarity restriction costs
// nothing extra in non-simultaneous regimes.

Verdict check_oracle_agreement() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(6502);
  std::uniform_real_distribution<double> uprice(0.05, 0.2);
  const EssParams params = fixtures::default_ess();
  const oracle::GridSpec grid{0.05};
  const int n = 2;

  int comp_checked = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // profiles on the grid so a feasible grid point always exists
    ExogenousProfile prof;
    for (int t = 0; t < n; ++t) {
      prof.p_sol.push_back(0.05 * static_cast<double>(rng() % 61));
      prof.p_load.push_back(0.05 * static_cast<double>(rng() % 41));
    }
    Tariff tariff;
    switch (trial % 4) {
      case 0: tariff = fixtures::flat_tariff(n, uprice(rng), 0.001); break;
      case 1: tariff = fixtures::flat_tariff(n, uprice(rng), 0.0, 0.0, true); break;
      case 2: tariff = fixtures::flat_tariff(n, uprice(rng)); break;
      default: tariff = fixtures::flat_tariff(n, uprice(rng), 0.0, 0.002); break;
    }

    const lp::P1 p1 = lp::build_p1(params, prof, tariff);
    const lp::SolveOutcome out = lp::solve(p1.lp);
    if (out.status != lp::SolveStatus::Optimal)
      return {false, format("trial %d: solve ended %s", trial, lp::to_string(out.status))};

    const double bound = grid.error_bound(tariff, params.dt);
    const oracle::EnumerationResult plain =
        oracle::enumerate(params, prof, tariff, grid, false);
    if (plain.objective < out.objective - 1e-9)
      return {false, format("trial %d: grid minimum below the LP optimum", trial)};
    if (plain.objective > out.objective + bound + 1e-9)
      return {false, format("trial %d: gap %.3e above bound %.3e", trial,
                            plain.objective - out.objective, bound)};
    worst_gap = std::max(worst_gap, plain.objective - out.objective);

    const oracle::EnumerationResult comp =
        oracle::enumerate(params, prof, tariff, grid, true);
    if (comp.objective < plain.objective - 1e-12)
      return {false, format("trial %d: restricted search beat the free one", trial)};
    if (kkt::classify_regime(tariff).regime == kkt::Regime::NonSimultaneous) {
      ++comp_checked;
      if (comp.objective - plain.objective > bound + 1e-9)
        return {false, format("trial %d: complementarity gap %.3e above bound %.3e",
                              trial, comp.objective - plain.objective, bound)};
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 300.0) return {false, format("took %.1f s, budget is 300 s", elapsed)};
  return {true, format("20 instances, worst LP gap %.2e, %d complementarity checks, %.1f s",
                       worst_gap, comp_checked, elapsed)};
}

// ---------------------------------------------------------------------------
// 7. A full 24-step solve finishes inside a second with a duality gap at
// the certification tolerance.

Verdict check_performance() {
  const EssParams params = fixtures::default_ess();
  ExogenousProfile prof;
  prof.p_sol = mpc::synthetic_solar();
  prof.p_load = mpc::synthetic_load();
  const Tariff tariff = fixtures::flat_tariff(24, 0.11, 0.001);

  const auto start = std::chrono::steady_clock::now();
  const lp::P1 p1 = lp::build_p1(params, prof, tariff);
  const lp::SolveOutcome out = lp::solve(p1.lp);
  const double elapsed = seconds_since(start);
  if (out.status != lp::SolveStatus::Optimal)
    return {false, format("solve ended %s", lp::to_string(out.status))};
  if (elapsed >= 1.0) return {false, format("solve took %.2f s", elapsed)};

  // With multipliers following c + A'lambda + E'mu = 0, the dual objective
  // is -(lambda'b + mu'd); strong duality makes the sum vanish.
  double gap = out.objective;
  for (std::size_t i = 0; i < p1.lp.ineq.size(); ++i)
    gap += out.dual_ineq[i] * p1.lp.ineq[i].rhs;
  for (std::size_t j = 0; j < p1.lp.eq.size(); ++j)
    gap += out.dual_eq[j] * p1.lp.eq[j].rhs;
  const double cap = 1e-8 * (1.0 + std::abs(out.objective));
  if (std::abs(gap) > cap)
    return {false, format("duality gap %.3e above %.3e", std::abs(gap), cap)};
  return {true, format("24-step solve in %.1f ms, duality gap %.1e (cap %.1e)",
                       elapsed * 1e3, std::abs(gap), cap)};
}

// ---------------------------------------------------------------------------
// 8. Net metering with a free overnight price and small penalties: the run
// stays clean and exports whenever solar outruns the load.

Verdict check_net_metering_export() {
  mpc::ScenarioConfig config;
  config.tariff.flat_price.reset();
  config.tariff.periods = {{"off-peak", 21, 9, 0.00},
                           {"shoulder", 9, 14, 0.13},
                           {"on-peak", 14, 18, 0.18},
                           {"shoulder", 18, 21, 0.13}};
  config.tariff.alpha = 0.001;
  config.tariff.beta = 0.001;
  config.tariff.net_metering = true;

  const mpc::RunLog log = mpc::run(config);
  int exports_with_surplus = 0;
  for (const mpc::StepRecord& rec : log.steps) {
    if (std::min(rec.p_ch, rec.p_dis) > kOverlapTol)
      return {false, format("step %d charges and discharges at once", rec.step)};
    if (rec.p_grid < -1e-9 &&
        log.hourly_solar[rec.hour] > log.hourly_load[rec.hour])
      ++exports_with_surplus;
  }
  if (exports_with_surplus == 0) return {false, "no export step with surplus solar"};
  return {true, format("clean run, %d export steps with surplus solar, cost %.3f",
                       exports_with_surplus, log.realized_cost)};
}

} // namespace

int main() {
  struct Entry {
    const char* name;
    Verdict (*run)();
  };
  const Entry entries[] = {
      {"regime table", check_regime_table},
      {"scaled solar overlap and penalty", check_scaled_solar},
      {"optimality certification", check_certification},
      {"certificate positivity", check_certificate_positivity},
      {"repair soundness", check_repair_soundness},
      {"oracle agreement", check_oracle_agreement},
      {"solve performance and duality", check_performance},
      {"net-metering export", check_net_metering_export},
  };

  int failures = 0;
  for (std::size_t i = 0; i < std::size(entries); ++i) {
    Verdict verdict;
    try {
      verdict = entries[i].run();
    } catch (const std::exception& e) {
      verdict = {false, std::string("unhandled exception: ") + e.what()};
    }
    if (!verdict.pass) ++failures;
    std::printf("criterion %zu (%s): %s  [%s]\n", i + 1, entries[i].name,
                verdict.pass ? "PASS" : "FAIL", verdict.detail.c_str());
  }
  if (failures > 0) std::printf("%d of 8 criteria failed\n", failures);
  else std::printf("all 8 criteria passed\n");
  return failures == 0 ? 0 : 1;
}
