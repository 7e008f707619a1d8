#include "hems/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hems/io.hpp"
#include "hems/problem.hpp"
#include "hems/repair.hpp"
#include "hems/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace hems::mpc {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

} // namespace

void TariffSpec::validate() const {
  if (flat_price.has_value() && !periods.empty())
    throw std::invalid_argument("tariff gives both a flat price and periods");
  if (!flat_price.has_value() && periods.empty())
    throw std::invalid_argument("tariff gives neither a flat price nor periods");
  require(std::isfinite(alpha) && alpha >= 0.0, "tariff alpha must be >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "tariff beta must be >= 0");

  if (flat_price.has_value()) {
    require(std::isfinite(*flat_price) && *flat_price >= 0.0,
            "flat price must be >= 0");
    return;
  }
  int covered[24] = {};
  for (const TariffPeriod& p : periods) {
    require(std::isfinite(p.price) && p.price >= 0.0,
            "period '" + p.name + "' price must be >= 0");
    require(p.start_hour >= 0 && p.start_hour < 24 && p.end_hour >= 0 && p.end_hour < 24,
            "period '" + p.name + "' hours must lie in [0, 24)");
    require(p.start_hour != p.end_hour,
            "period '" + p.name + "' is empty; start and end coincide");
    for (int h = p.start_hour; h != p.end_hour; h = (h + 1) % 24) ++covered[h];
  }
  for (int h = 0; h < 24; ++h) {
    if (covered[h] == 0)
      throw std::invalid_argument("tariff periods leave hour " + std::to_string(h) +
                                  " unpriced");
    if (covered[h] > 1)
      throw std::invalid_argument("tariff periods price hour " + std::to_string(h) +
                                  " more than once");
  }
}

std::vector<double> TariffSpec::hourly_prices() const {
  validate();
  std::vector<double> prices(24, 0.0);
  if (flat_price.has_value()) {
    std::fill(prices.begin(), prices.end(), *flat_price);
    return prices;
  }
  for (const TariffPeriod& p : periods)
    for (int h = p.start_hour; h != p.end_hour; h = (h + 1) % 24) prices[h] = p.price;
  return prices;
}

Tariff TariffSpec::window(int first_hour, int n) const {
  require(n >= 1, "tariff window must cover at least one step");
  require(first_hour >= 0, "tariff window start must be non-negative");
  const std::vector<double> prices = hourly_prices();
  Tariff t;
  t.alpha = alpha;
  t.beta = beta;
  t.net_metering = net_metering;
  for (int i = 0; i < n; ++i) t.c_e.push_back(prices[(first_hour + i) % 24]);
  return t;
}

void ProfileSpec::validate() const {
  require(std::isfinite(solar_scale) && solar_scale >= 0.0,
          "solar_scale must be >= 0");
  require(std::isfinite(array_area_m2) && array_area_m2 > 0.0,
          "array_area_m2 must be > 0");
  require(array_efficiency > 0.0 && array_efficiency <= 1.0,
          "array_efficiency must lie in (0, 1]");
  require(inverter_efficiency > 0.0 && inverter_efficiency <= 1.0,
          "inverter_efficiency must lie in (0, 1]");
}

void ScenarioConfig::validate() const {
  ess.validate();
  tariff.validate();
  profiles.validate();
  require(horizon >= 1, "horizon must be >= 1");
  require(steps >= 1, "steps must be >= 1");
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::abs(ess.dt - dt) <= 1e-12,
          "ess step length is derived from the scenario dt; do not set it separately");
  require(start_hour >= 0 && start_hour < 24, "start_hour must lie in [0, 24)");
  require(std::isfinite(feasibility_tol) && feasibility_tol > 0.0,
          "feasibility_tol must be > 0");
  require(std::isfinite(kkt_tol) && kkt_tol > 0.0, "kkt_tol must be > 0");
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void assign(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario root must be a JSON object");

  ScenarioConfig c;
  try {
    check_keys(j,
               {"ess", "tariff", "profiles", "horizon", "dt", "steps", "start_hour",
                "feasibility_tol", "kkt_tol"},
               "scenario");
    assign(j, "dt", c.dt);
    c.ess.dt = c.dt;
    if (j.contains("ess")) {
      const json& e = j.at("ess");
      check_keys(e, {"e_min", "e_max", "e0", "p_ch_max", "p_dis_max", "eta_c", "eta_d"},
                 "ess");
      assign(e, "e_min", c.ess.e_min);
      assign(e, "e_max", c.ess.e_max);
      assign(e, "e0", c.ess.e0);
      assign(e, "p_ch_max", c.ess.p_ch_max);
      assign(e, "p_dis_max", c.ess.p_dis_max);
      assign(e, "eta_c", c.ess.eta_c);
      assign(e, "eta_d", c.ess.eta_d);
    }
    if (j.contains("tariff")) {
      const json& t = j.at("tariff");
      check_keys(t, {"flat_price", "periods", "alpha", "beta", "net_metering"},
                 "tariff");
      if (t.contains("periods")) {
        c.tariff.flat_price.reset();
        for (const json& p : t.at("periods")) {
          check_keys(p, {"name", "start_hour", "end_hour", "price"}, "tariff period");
          TariffPeriod period;
          assign(p, "name", period.name);
          assign(p, "start_hour", period.start_hour);
          assign(p, "end_hour", period.end_hour);
          assign(p, "price", period.price);
          c.tariff.periods.push_back(std::move(period));
        }
      }
      if (t.contains("flat_price")) {
        if (!c.tariff.periods.empty())
          throw ConfigError("tariff gives both a flat price and periods");
        c.tariff.flat_price = t.at("flat_price").get<double>();
      }
      assign(t, "alpha", c.tariff.alpha);
      assign(t, "beta", c.tariff.beta);
      assign(t, "net_metering", c.tariff.net_metering);
    }
    if (j.contains("profiles")) {
      const json& p = j.at("profiles");
      check_keys(p,
                 {"solar_csv", "load_csv", "solar_scale", "array_area_m2",
                  "array_efficiency", "inverter_efficiency"},
                 "profiles");
      assign(p, "solar_csv", c.profiles.solar_csv);
      assign(p, "load_csv", c.profiles.load_csv);
      assign(p, "solar_scale", c.profiles.solar_scale);
      assign(p, "array_area_m2", c.profiles.array_area_m2);
      assign(p, "array_efficiency", c.profiles.array_efficiency);
      assign(p, "inverter_efficiency", c.profiles.inverter_efficiency);
    }
    assign(j, "horizon", c.horizon);
    assign(j, "steps", c.steps);
    assign(j, "start_hour", c.start_hour);
    assign(j, "feasibility_tol", c.feasibility_tol);
    assign(j, "kkt_tol", c.kkt_tol);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field has the wrong type: ") + e.what());
  }
  // Out-of-range values in a well-formed file are still config errors.
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  ScenarioConfig c = parse_scenario(text.str());

  // Data files named by a scenario live next to it unless absolute.
  const fs::path base = fs::path(path).parent_path();
  const auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.profiles.solar_csv);
  resolve(c.profiles.load_csv);
  return c;
}

std::vector<double> ingest_solar(const std::string& csv_path, double array_area_m2,
                                 double array_efficiency, double inverter_efficiency,
                                 double scale) {
  ProfileSpec spec;
  spec.solar_scale = scale;
  spec.array_area_m2 = array_area_m2;
  spec.array_efficiency = array_efficiency;
  spec.inverter_efficiency = inverter_efficiency;
  spec.validate();

  std::vector<double> series = io::read_hourly_csv(csv_path, "irradiance_w_m2");
  for (int h = 0; h < 24; ++h) {
    if (!(series[h] >= 0.0) || !std::isfinite(series[h]))
      throw io::IoError(csv_path + ": negative irradiance at hour " + std::to_string(h));
    series[h] *= array_area_m2 * array_efficiency * inverter_efficiency / 1000.0 * scale;
  }
  return series;
}

std::vector<double> synthetic_solar(double scale) {
  require(std::isfinite(scale) && scale >= 0.0, "solar scale must be >= 0");
  std::vector<double> v(24, 0.0);
  for (int h = 0; h < 24; ++h) {
    // sin(pi) is a rounding hair above zero; snap so night hours read 0.
    const double p = scale * 3.0 * std::sin(M_PI * (h - 6.0) / 14.0);
    v[h] = p > 1e-12 ? p : 0.0;
  }
  return v;
}

std::vector<double> synthetic_load() {
  const auto bump = [](double h, double center, double halfwidth, double amp) {
    const double u = (h - center) / halfwidth;
    if (std::abs(u) >= 1.0) return 0.0;
    const double c = std::cos(M_PI * u / 2.0);
    return amp * c * c;
  };
  std::vector<double> v(24, 0.0);
  for (int h = 0; h < 24; ++h)
    v[h] = 0.4 + bump(h, 7.5, 2.5, 0.8) + bump(h, 19.0, 3.5, 1.6);
  return v;
}

ResolvedProfiles resolve_profiles(const ScenarioConfig& config) {
  config.profiles.validate();
  ResolvedProfiles rp;
  if (config.profiles.solar_csv.empty()) {
    rp.solar = synthetic_solar(config.profiles.solar_scale);
  } else {
    rp.solar = ingest_solar(config.profiles.solar_csv, config.profiles.array_area_m2,
                            config.profiles.array_efficiency,
                            config.profiles.inverter_efficiency,
                            config.profiles.solar_scale);
  }
  if (config.profiles.load_csv.empty()) {
    rp.load = synthetic_load();
  } else {
    rp.load = io::read_hourly_csv(config.profiles.load_csv, "load_kw");
    for (int h = 0; h < 24; ++h)
      if (!(rp.load[h] >= 0.0) || !std::isfinite(rp.load[h]))
        throw io::IoError(config.profiles.load_csv + ": negative load at hour " +
                          std::to_string(h));
  }
  return rp;
}

ExogenousProfile forecast_window(const ResolvedProfiles& rp, int first_hour, int n) {
  require(n >= 1, "forecast window must cover at least one step");
  require(first_hour >= 0, "forecast window start must be non-negative");
  ExogenousProfile prof;
  for (int i = 0; i < n; ++i) {
    const int h = (first_hour + i) % 24;
    prof.p_sol.push_back(rp.solar[h]);
    prof.p_load.push_back(rp.load[h]);
  }
  return prof;
}

namespace {

std::string series_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += io::format_double(v[i]);
  }
  return s + "]";
}

std::string window_dump(int step, lp::SolveStatus status, const EssParams& params,
                        const ExogenousProfile& prof, const Tariff& tariff) {
  std::ostringstream out;
  out << "dispatch solve failed";
  if (step >= 0) out << " at step " << step;
  out << ": status " << lp::to_string(status) << "; horizon " << prof.size()
      << ", e0 " << io::format_double(params.e0) << "\n  p_sol  "
      << series_text(prof.p_sol) << "\n  p_load " << series_text(prof.p_load)
      << "\n  c_e    " << series_text(tariff.c_e);
  return out.str();
}

} // namespace

RunLog run(const ScenarioConfig& config) {
  config.validate();
  RunLog log;
  log.config = config;
  const ResolvedProfiles rp = resolve_profiles(config);
  log.hourly_solar = rp.solar;
  log.hourly_load = rp.load;

  double e = config.ess.e0;
  log.realized_soc.push_back(e);
  for (int k = 0; k < config.steps; ++k) {
    const int abs_hour = config.start_hour + k;
    const ExogenousProfile prof = forecast_window(rp, abs_hour, config.horizon);
    const Tariff tariff = config.tariff.window(abs_hour, config.horizon);
    EssParams params = config.ess;
    params.e0 = e;

    const lp::P1 p1 = lp::build_p1(params, prof, tariff);
    const lp::SolveOutcome out = lp::solve(p1.lp);
    if (out.status != lp::SolveStatus::Optimal)
      throw SolverAbort(k, window_dump(k, out.status, params, prof, tariff));

    StepRecord rec;
    rec.step = k;
    rec.hour = abs_hour % 24;
    rec.e_before = e;
    rec.objective = out.objective;
    rec.kkt = kkt::check(p1.lp, p1.index, out, params, tariff, config.kkt_tol);
    rec.plan = lp::extract_trajectory(out.x, config.horizon);
    rec.p_grid = rec.plan.p_grid[0];
    rec.p_ch = rec.plan.p_ch[0];
    rec.p_dis = rec.plan.p_dis[0];
    rec.p_c = rec.plan.p_c[0];
    rec.simultaneous =
        std::min(rec.p_ch, rec.p_dis) > config.feasibility_tol;
    for (double overlap : simultaneity_index(rec.plan))
      if (overlap > config.feasibility_tol) rec.plan_simultaneous = true;

    e = soc_step(params, e, rec.p_ch, rec.p_dis);
    rec.e_after = e;
    log.realized_soc.push_back(e);
    log.applied.p_grid.push_back(rec.p_grid);
    log.applied.p_ch.push_back(rec.p_ch);
    log.applied.p_dis.push_back(rec.p_dis);
    log.applied.p_c.push_back(rec.p_c);
    if (k == 0) log.first_plan_objective = out.objective;
    log.steps.push_back(std::move(rec));
  }
  const Tariff run_tariff = config.tariff.window(config.start_hour, config.steps);
  log.realized_cost = cost(run_tariff, log.applied, config.dt);
  return log;
}

kkt::Report check_stored(const ScenarioConfig& config, const DecisionTrajectory& x) {
  config.validate();
  x.validate();
  const int n = static_cast<int>(x.size());
  if (n < 1) throw std::invalid_argument("stored trajectory is empty");

  const ResolvedProfiles rp = resolve_profiles(config);
  const ExogenousProfile prof = forecast_window(rp, config.start_hour, n);
  const Tariff tariff = config.tariff.window(config.start_hour, n);
  const lp::P1 p1 = lp::build_p1(config.ess, prof, tariff);
  lp::SolveOutcome out = lp::solve(p1.lp);
  if (out.status != lp::SolveStatus::Optimal)
    throw SolverAbort(-1, window_dump(-1, out.status, config.ess, prof, tariff));

  // Keep the reference multipliers, substitute the stored point.
  out.x = lp::pack_trajectory(x);
  return kkt::check(p1.lp, p1.index, out, config.ess, tariff, config.kkt_tol);
}

void write_bundle(const RunLog& log, const std::string& dir) {
  fs::create_directories(dir);

  const std::vector<double> soc_after(log.realized_soc.begin() + 1,
                                      log.realized_soc.end());
  io::atomic_write(dir + "/trajectory.csv",
                   io::trajectory_csv(log.applied, soc_after, log.config.start_hour));

  json kkt_records = json::array();
  for (const StepRecord& r : log.steps) {
    kkt_records.push_back({{"step", r.step},
                           {"hour", r.hour},
                           {"primal_residual", r.kkt.primal_residual},
                           {"dual_residual", r.kkt.dual_residual},
                           {"slackness_residual", r.kkt.slackness_residual},
                           {"stationarity_residual", r.kkt.stationarity_residual()},
                           {"tolerance", r.kkt.tolerance},
                           {"pass", r.kkt.pass}});
  }
  io::atomic_write(dir + "/kkt.json", kkt_records.dump(2) + "\n");

  json summary;
  summary["objective"] = log.first_plan_objective;
  summary["total_cost"] = log.realized_cost;
  json sim_steps = json::array();
  bool all_pass = true;
  for (const StepRecord& r : log.steps) {
    if (r.simultaneous) sim_steps.push_back(r.step);
    all_pass = all_pass && r.kkt.pass;
  }
  summary["simultaneity_steps"] = sim_steps;
  summary["kkt_all_pass"] = all_pass;
  summary["steps"] = static_cast<int>(log.steps.size());
  summary["horizon"] = log.config.horizon;

  const kkt::RegimeReport regime =
      kkt::classify_regime(log.config.tariff.window(log.config.start_hour, 24));
  summary["regime"] = kkt::to_string(regime.regime);
  summary["regime_reason"] = regime.reason;

  // Cost freed by cleaning up the applied trajectory; zero when it was
  // already overlap-free.
  try {
    const ResolvedProfiles rp{log.hourly_solar, log.hourly_load};
    const int n = static_cast<int>(log.applied.size());
    const repair::RepairResult rr = repair::repair_until_clean(
        log.applied, log.config.ess,
        forecast_window(rp, log.config.start_hour, n),
        log.config.tariff.window(log.config.start_hour, n),
        log.config.feasibility_tol);
    summary["repair_delta"] = rr.cost_reduction;
    summary["repair_rounds"] = rr.rounds;
  } catch (const repair::RepairError& e) {
    summary["repair_delta"] = nullptr;
    summary["repair_error"] = e.what();
  }
  io::atomic_write(dir + "/summary.json", summary.dump(2) + "\n");
}

} // namespace hems::mpc
