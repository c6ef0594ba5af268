#include "csl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csl/artifact.hpp"
#include "csl/config.hpp"
#include "csl/constants.hpp"
#include "csl/dynamics.hpp"
#include "csl/error.hpp"
#include "csl/inference.hpp"
#include "csl/rates.hpp"
#include "csl/scan.hpp"
#include "csl/state.hpp"

namespace csl {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// A flag that, when given, replaces one config field before validation.
struct Override {
  std::string section;
  std::string key;
  double number = 0.0;
  CLI::Option* option = nullptr;
};

struct Invocation {
  std::string config_path;
  std::string out_path;
  unsigned threads = 1;
  std::deque<Override> overrides;
};

void add_common(CLI::App* sub, Invocation& inv, const std::string& out_help) {
  sub->add_option("--config", inv.config_path, "JSON configuration file (sections particle, trap, gas, collapse, inference, output)")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", inv.out_path, out_help);
  sub->add_option("--threads", inv.threads, "cap on worker threads for internal parallel loops (0 = all cores)")
      ->capture_default_str();
}

void add_override(CLI::App* sub, Invocation& inv, const std::string& flag, const std::string& section,
                  const std::string& key, const std::string& help) {
  auto& o = inv.overrides.emplace_back();
  o.section = section;
  o.key = key;
  o.option = sub->add_option(flag, o.number, help);
}

Config resolve_config(const Invocation& inv) {
  json raw = inv.config_path.empty() ? json::object() : read_config_json(inv.config_path);
  for (const auto& o : inv.overrides) {
    if (o.option->count() == 0) continue;
    if (!raw.contains(o.section)) raw[o.section] = json::object();
    const double rounded = std::round(o.number);
    const bool integral = o.key == "chains" || o.key == "samples" || o.key == "burn" ||
                          o.key == "seed" || o.key == "n_points";
    if (integral) {
      if (rounded != o.number || rounded < 0) {
        throw ConfigError(fmt::format("{}.{}: expected a non-negative integer", o.section, o.key));
      }
      raw[o.section][o.key] = static_cast<std::uint64_t>(rounded);
    } else {
      raw[o.section][o.key] = o.number;
    }
  }
  return validate_config(raw);
}

fs::path output_path(const Invocation& inv, const Config& cfg, const std::string& fallback) {
  if (!inv.out_path.empty()) return inv.out_path;
  return fs::path(cfg.output.directory) / fallback;
}

RunManifest base_manifest(const std::string& name, const Config& cfg, const std::vector<std::string>& args) {
  RunManifest m;
  m.subcommand = name;
  m.version = CSL_VERSION;
  m.seed = cfg.inference.seed;
  m.config = to_json(cfg);
  m.arguments = args;
  for (const auto& w : cfg.warnings) m.add("warning", w);
  return m;
}

void emit(const fs::path& path, const Table& table, RunManifest& manifest, double started_seconds) {
  manifest.outputs.push_back(path.string());
  write_table(path, table, manifest);
  manifest.duration_seconds = started_seconds;
  write_manifest(path, manifest);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct RatesArgs {
  double dx_min = 1e-9;
  double dx_max = 1e-5;
  int points = 200;
};

struct CoherenceArgs {
  std::string mode = "static";
  double dx = 200e-9;
  double t_max = 10.0;
  int points = 101;
  double c0 = 1.0;
};

struct ExcludeArgs {
  ExclusionRequest request;
  std::optional<double> mass;
};

struct MassScanArgs {
  double mass_min_amu = 1e3;
  double mass_max_amu = 1e10;
  int points = 141;
  std::optional<double> lambda;
  std::optional<double> dx;
  bool no_environment = false;
};

struct StateArgs {
  double alpha = 1.25;
  std::optional<int> nmax;
  int grid_points = 121;
  std::optional<double> grid_extent;
  double tau = 0.0;
  int records = 50;
  std::optional<double> kappa;
  std::optional<double> gamma_m;
  std::optional<double> n_th;
  std::string basis = "fock";
  std::string frame = "rotating";
};

struct FitArgs {
  std::string data;
};

using Clock = std::chrono::steady_clock;

void check_positive(double v, const std::string& flag) {
  if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(fmt::format("{}: must be > 0", flag));
}

int run_rates(const Config& cfg, const Invocation& inv, const RatesArgs& a,
              const std::vector<std::string>& args, std::ostream&) {
  const auto t0 = Clock::now();
  check_positive(a.dx_min, "--dx-min");
  if (!(a.dx_max > a.dx_min)) throw ConfigError("--dx-max: must exceed --dx-min");
  if (a.points < 2) throw ConfigError("--points: must be >= 2");
  const auto budget = diffusion_budget(cfg);
  const Geometry geo = cfg.geometry();

  Table t;
  t.columns = {"delta_x", "gamma_env", "gamma_csl", "gamma_dp", "gamma_total"};
  for (double dx : log_space(a.dx_min, a.dx_max, a.points)) {
    const double env = gamma_env(budget.total, dx);
    const double csl = gamma_csl(geo.collapse, geo.mass, geo.radius, dx);
    t.rows.push_back({dx, env, csl, gamma_dp(geo.mass, geo.collapse.r0_dp, dx), env + csl});
  }
  RunManifest m = base_manifest("rates", cfg, args);
  m.add("d_pp_gas", budget.gas);
  m.add("d_pp_trap", budget.trap);
  m.add("d_pp_blackbody", budget.blackbody);
  m.add("d_pp_total", budget.total);
  m.add("units", "delta_x m; gamma 1/s");
  emit(output_path(inv, cfg, "rates.csv"), t, m, seconds_since(t0));
  return 0;
}

int run_coherence(const Config& cfg, const Invocation& inv, const CoherenceArgs& a,
                  const std::vector<std::string>& args, std::ostream&) {
  const auto t0 = Clock::now();
  check_positive(a.dx, "--dx");
  check_positive(a.t_max, "--t-max");
  if (a.points < 2) throw ConfigError("--points: must be >= 2");
  const auto budget = diffusion_budget(cfg);
  const Geometry geo = cfg.geometry();
  std::vector<double> times(static_cast<std::size_t>(a.points));
  for (int i = 0; i < a.points; ++i) times[i] = a.t_max * i / (a.points - 1);

  RunManifest m = base_manifest("coherence", cfg, args);
  m.add("mode", a.mode);
  CoherenceCurve curve;
  if (a.mode == "static") {
    const double env = gamma_env(budget.total, a.dx);
    const double csl = gamma_csl(geo.collapse, geo.mass, geo.radius, a.dx);
    m.add("gamma_env", env);
    m.add("gamma_csl", csl);
    curve = coherence_static(a.c0, env, csl, times);
  } else if (a.mode == "dynamic") {
    const auto scales = derive_scales(cfg.particle, cfg.trap);
    const double alpha = a.dx / (2.0 * scales.x_zpf);
    const RateFunction rate = [&](double dx) { return gamma_total(budget.total, geo, dx); };
    m.add("alpha", alpha);
    m.add("cycle_averaged_gamma", cycle_averaged_gamma(rate, alpha, scales.x_zpf, cfg.trap.angular_frequency));
    curve = coherence_dynamic(a.c0, rate, alpha, scales.x_zpf, cfg.trap.angular_frequency, times);
  } else {
    throw ConfigError("--mode: expected static or dynamic");
  }
  m.add("delta_x", a.dx);
  m.add("units", "t s; C dimensionless");
  Table t;
  t.columns = {"t", "C"};
  for (std::size_t i = 0; i < curve.times.size(); ++i) t.rows.push_back({curve.times[i], curve.values[i]});
  emit(output_path(inv, cfg, "coherence.csv"), t, m, seconds_since(t0));
  return 0;
}

int run_gen_data(const Config& cfg, const Invocation& inv, const std::vector<std::string>& args,
                 std::ostream&) {
  const auto t0 = Clock::now();
  const auto& inf = cfg.inference;
  const auto grid = log_space(cfg.dx_min(), cfg.dx_max(), inf.n_points);
  const auto data = generate_synthetic_dataset(cfg.geometry(), {inf.lambda_true, inf.dpp_true}, grid,
                                               inf.noise, inf.seed, inv.threads);
  RunManifest m = base_manifest("gen-data", cfg, args);
  describe_dataset(data, m);
  m.add("noise", inf.noise);
  m.add("units", "delta_x m; gamma 1/s; sigma 1/s");
  emit(output_path(inv, cfg, "gen-data.csv"), dataset_table(data), m, seconds_since(t0));
  return 0;
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

int run_fit(const Config& cfg, const Invocation& inv, const FitArgs& a, const std::vector<std::string>& args,
            std::ostream&, std::ostream& err) {
  const auto t0 = Clock::now();
  const auto data = read_dataset(a.data);
  PriorSpec prior;
  prior.lambda_log_min = cfg.inference.lambda_log_min;
  prior.lambda_log_max = cfg.inference.lambda_log_max;
  prior.dpp_center = cfg.dpp_center();
  prior.dpp_sigma = cfg.dpp_sigma();
  McmcSettings s;
  s.chains = cfg.inference.chains;
  s.samples = cfg.inference.samples;
  s.burn = cfg.burn();
  s.seed = cfg.inference.seed;
  s.threads = inv.threads;
  const auto post = run_mcmc(data, prior, cfg.geometry(), s);

  RunManifest m = base_manifest("fit", cfg, args);
  m.add("data", a.data);
  m.add("burn", std::to_string(s.resolved_burn()));
  Table t;
  t.columns = {"chain", "step", "log10_lambda", "d_pp"};
  for (std::size_t c = 0; c < post.chains.size(); ++c) {
    for (std::size_t k = 0; k < post.chains[c].size(); ++k) {
      const auto& smp = post.chains[c][k];
      t.rows.push_back({static_cast<double>(c), static_cast<double>(s.resolved_burn() + k), smp.log10_lambda,
                        smp.d_pp});
    }
  }
  const fs::path samples_path = output_path(inv, cfg, "fit-samples.csv");
  fs::path summary_path = samples_path;
  summary_path.replace_extension(".summary.json");

  json summary;
  summary["map"] = {{"log10_lambda", post.map_point.log10_lambda},
                    {"d_pp", post.map_point.d_pp},
                    {"log_posterior", post.map_point.log_posterior}};
  summary["hpd68"] = {{"log10_lambda", interval_json(post.hpd68_log10_lambda)},
                      {"d_pp", interval_json(post.hpd68_dpp)}};
  summary["hpd95"] = {{"log10_lambda", interval_json(post.hpd95_log10_lambda)},
                      {"d_pp", interval_json(post.hpd95_dpp)}};
  summary["r_gr"] = {{"log10_lambda", post.r_gr[0]}, {"d_pp", post.r_gr[1]}};
  summary["acceptance_rate"] = post.acceptance_rate;
  summary["chain_acceptance"] = post.chain_acceptance;
  summary["upper_bound_95"] = upper_bound(post, 0.95);
  summary["lower_edge_mass"] = lower_edge_mass(post);
  summary["correlation"] = posterior_correlation(post);
  summary["converged"] = post.converged;
  summary["warnings"] = post.warnings;
  summary["samples_per_chain"] = post.chains.front().size();
  summary["seed"] = s.seed;
  summary["prior"] = {{"lambda_log_min", prior.lambda_log_min},
                      {"lambda_log_max", prior.lambda_log_max},
                      {"dpp_center", prior.dpp_center},
                      {"dpp_sigma", prior.dpp_sigma}};
  if (data.truth) summary["truth"] = {{"lambda_csl", data.truth->lambda_csl}, {"d_pp", data.truth->d_pp}};
  summary["data"] = a.data;
  summary["config"] = to_json(cfg);
  summary["version"] = CSL_VERSION;
  for (const auto& [k, v] : summary.items()) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) {
      throw NumericalError(fmt::format("fit summary: non-finite value for '{}'", k));
    }
  }

  m.add("summary", summary_path.filename().string());
  m.outputs.push_back(summary_path.string());
  emit(samples_path, t, m, seconds_since(t0));
  write_json(summary_path, summary);

  for (const auto& w : post.warnings) err << "warning: " << w << '\n';
  if (!post.converged) {
    err << "error: chains did not converge\n";
    return 2;
  }
  return 0;
}

int run_exclude(const Config& cfg, const Invocation& inv, ExcludeArgs a, const std::vector<std::string>& args,
                std::ostream&) {
  const auto t0 = Clock::now();
  const Geometry geo = cfg.geometry();
  a.request.mass = a.mass.value_or(geo.mass);
  a.request.radius = geo.radius;
  a.request.m0 = geo.collapse.m0;
  a.request.threads = inv.threads;
  const auto map = scan_exclusion(a.request);

  Table t;
  t.columns = {"log10_lambda", "log10_rc", "detectable"};
  for (std::size_t i = 0; i < map.lambda_axis.size(); ++i) {
    for (std::size_t j = 0; j < map.rc_axis.size(); ++j) {
      t.rows.push_back({std::log10(map.lambda_axis[i]), std::log10(map.rc_axis[j]), map.at(i, j) ? 1.0 : 0.0});
    }
  }
  RunManifest m = base_manifest("exclude", cfg, args);
  m.add("gamma_min", map.gamma_min);
  m.add("mass", map.mass);
  m.add("radius", a.request.radius);
  m.add("delta_x", map.delta_x);
  m.add("criterion", "gamma_csl(lambda, r_c) >= gamma_min");
  emit(output_path(inv, cfg, "exclude.csv"), t, m, seconds_since(t0));
  return 0;
}

int run_mass_scan(const Config& cfg, const Invocation& inv, const MassScanArgs& a,
                  const std::vector<std::string>& args, std::ostream&) {
  const auto t0 = Clock::now();
  const double lambda = a.lambda.value_or(cfg.collapse.lambda_csl);
  std::optional<EnvironmentComparison> env;
  const auto budget = diffusion_budget(cfg);
  if (!a.no_environment) {
    EnvironmentComparison e;
    e.gas = cfg.gas;
    e.density = cfg.particle.density;
    e.extra_dpp = budget.trap + budget.blackbody;
    e.delta_x = a.dx.value_or(cfg.collapse.r_c);
    check_positive(e.delta_x, "--dx");
    env = e;
  }
  const auto scan = scan_mass(lambda, a.mass_min_amu * constants::amu, a.mass_max_amu * constants::amu,
                              a.points, cfg.collapse.m0, env);
  Table t;
  t.columns = {"mass_amu", "gamma_csl_max", "gamma_env_comparison"};
  for (const auto& p : scan.points) t.rows.push_back({p.mass / constants::amu, p.gamma_csl_max, p.gamma_env});
  RunManifest m = base_manifest("mass-scan", cfg, args);
  m.add("lambda_csl", lambda);
  if (env) {
    m.add("comparison_delta_x", env->delta_x);
    m.add("comparison_extra_dpp", env->extra_dpp);
    for (double c : scan.crossings) m.add("crossing_mass_amu", c / constants::amu);
  } else {
    m.add("comparison", "disabled; gamma_env_comparison column is 0");
  }
  emit(output_path(inv, cfg, "mass-scan.csv"), t, m, seconds_since(t0));
  return 0;
}

struct PreparedState {
  OscillatorUnits units;
  int n_max = 0;
  LindbladProblem problem;
  double d_pp = 0.0;
};

PreparedState prepare_state(const Config& cfg, const StateArgs& a) {
  check_positive(a.alpha, "--alpha");
  PreparedState p;
  p.units.mass = cfg.particle.resolved_mass();
  p.units.omega = cfg.trap.angular_frequency;
  p.n_max = a.nmax.value_or(default_nmax(a.alpha));
  const double x = p.units.x_zpf();
  const double hbar = constants::hbar;
  p.d_pp = a.kappa ? *a.kappa * hbar * hbar * p.units.omega / (x * x) : diffusion_budget(cfg).total;
  ThermalizationSpec therm = cfg.thermalization;
  if (a.gamma_m) therm.gamma_m = *a.gamma_m;
  if (a.n_th) therm.n_th = *a.n_th;
  CMatrix h0;
  if (a.frame == "rotating") {
    h0 = number_operator(p.n_max).cast<Complex>();
  } else if (a.frame == "static") {
    h0 = CMatrix::Zero(p.n_max, p.n_max);
  } else {
    throw ConfigError("--frame: expected rotating or static");
  }
  p.problem = LindbladProblem::physical(h0, p.d_pp, therm, p.units);
  return p;
}

// Fixed RK4 step that respects the stability guard and lands on every record.
std::pair<double, int> plan_steps(const LindbladProblem& problem, double tau, int records) {
  const int per_record_min = std::max(1, static_cast<int>(std::ceil(tau / records * problem.max_rate() / 0.05)));
  const int steps = per_record_min * records;
  if (steps > 50'000'000) throw ConfigError("--tau: evolution needs more than 5e7 RK4 steps; shorten it");
  return {tau / steps, per_record_min};
}

int run_evolve(const Config& cfg, const Invocation& inv, const StateArgs& a, const std::vector<std::string>& args,
               std::ostream&) {
  const auto t0 = Clock::now();
  if (!(a.tau > 0.0)) throw ConfigError("--tau: must be > 0");
  if (a.records < 1) throw ConfigError("--records: must be >= 1");
  const PreparedState p = prepare_state(cfg, a);
  const auto rho0 = DensityMatrix::pure(prepare_cat(a.alpha, p.n_max));
  const auto [dt, every] = plan_steps(p.problem, a.tau, a.records);
  const auto traj = evolve_lindblad(rho0, p.problem, dt, every * a.records, every);

  const bool rotating = a.frame == "rotating";
  Table t;
  t.columns = {"t", "trace", "purity", "coherence", "mean_n"};
  for (const auto& snap : traj) {
    const Complex beta = rotating ? a.alpha * std::exp(Complex(0.0, -snap.time)) : Complex(a.alpha, 0.0);
    t.rows.push_back({snap.time * p.units.time(), snap.rho.trace(), snap.rho.purity(),
                      std::abs(snap.rho.coherent_element(beta, -beta)), snap.rho.mean_number()});
  }
  RunManifest m = base_manifest("evolve", cfg, args);
  m.add("alpha", a.alpha);
  m.add("nmax", std::to_string(p.n_max));
  m.add("frame", a.frame);
  m.add("d_pp", p.d_pp);
  m.add("kappa", p.problem.localization);
  m.add("damping", p.problem.damping);
  m.add("n_th", p.problem.n_th);
  m.add("dt_internal", dt);
  m.add("units", "t s; coherence = |<alpha(t)|rho|-alpha(t)>|");
  emit(output_path(inv, cfg, "evolve.csv"), t, m, seconds_since(t0));
  return 0;
}

int run_wigner(const Config& cfg, const Invocation& inv, const StateArgs& a, const std::vector<std::string>& args,
               std::ostream&) {
  const auto t0 = Clock::now();
  if (a.grid_points < 2) throw ConfigError("--grid-points: must be >= 2");
  if (a.tau < 0.0) throw ConfigError("--tau: must be >= 0");
  StateArgs sa = a;
  sa.frame = "static";
  const PreparedState p = prepare_state(cfg, sa);
  DensityMatrix rho = DensityMatrix::pure(prepare_cat(a.alpha, p.n_max));
  const double extent = a.grid_extent.value_or(std::max(6.0, 2.0 * a.alpha + 5.0));
  check_positive(extent, "--grid-extent");

  if (a.basis == "fock") {
    if (a.tau > 0.0) {
      const auto [dt, every] = plan_steps(p.problem, a.tau, 1);
      rho = evolve_lindblad(rho, p.problem, dt, every, every).back().rho;
    }
  } else if (a.basis == "position") {
    auto grid = PositionGrid::for_cat(4.0 * a.alpha, p.units.x_zpf(), 256);
    rho = to_position(rho, grid);
    if (a.tau > 0.0) {
      const double d_pp = p.d_pp;
      rho = apply_localization_kernel(rho, [d_pp](double dx) { return gamma_env(d_pp, dx); },
                                      a.tau * p.units.time());
    }
  } else {
    throw ConfigError("--basis: expected fock or position");
  }

  WignerRequest req;
  req.x_max = extent;
  req.p_max = extent;
  req.nx = a.grid_points;
  req.np = a.grid_points;
  const auto w = wigner(rho, req, p.units);

  Table t;
  t.columns = {"x", "p", "W"};
  for (std::size_t i = 0; i < w.x_axis.size(); ++i) {
    for (std::size_t j = 0; j < w.p_axis.size(); ++j) {
      t.rows.push_back({w.x_axis[i], w.p_axis[j], w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  RunManifest m = base_manifest("wigner", cfg, args);
  m.add("alpha", a.alpha);
  m.add("basis", a.basis);
  m.add("nmax", std::to_string(p.n_max));
  m.add("tau", a.tau);
  m.add("kappa", p.problem.localization);
  m.add("normalization", w.normalization());
  m.add("purity_from_w", w.purity());
  m.add("purity_from_rho", rho.purity());
  m.add("units", "x m; p kg m/s; W 1/(J s)");
  emit(output_path(inv, cfg, "wigner.csv"), t, m, seconds_since(t0));
  return 0;
}

int run_derive(const Config& cfg, const Invocation& inv, std::ostream& out) {
  const auto scales = derive_scales(cfg.particle, cfg.trap);
  const auto budget = diffusion_budget(cfg);
  json j;
  j["mass"] = scales.mass;
  j["geometric_mass"] = cfg.particle.geometric_mass();
  j["x_zpf"] = scales.x_zpf;
  j["lamb_dicke"] = scales.lamb_dicke;
  j["k_optical"] = scales.k_optical;
  j["d_pp"] = {{"gas", budget.gas}, {"trap", budget.trap}, {"blackbody", budget.blackbody}, {"total", budget.total}};
  j["heating_rate_equivalent"] = heating_from_dpp(budget.total, scales.mass, cfg.trap.angular_frequency);
  j["gamma_csl_max"] = gamma_csl_max(cfg.collapse, scales.mass);
  j["warnings"] = cfg.warnings;
  j["notes"] = cfg.notes;
  j["units"] = "SI: kg, m, 1/m, kg^2 m^2/s^3, quanta/s, 1/s";
  out << j.dump(2) << '\n';
  if (!inv.out_path.empty()) write_json(inv.out_path, j);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cslsim: calibrated decoherence rates, CSL inference and exclusion maps for a levitated nanosphere",
               "cslsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CSL_VERSION));

  Invocation inv;

  auto* rates = app.add_subcommand("rates", "Gamma_env, Gamma_CSL, Gamma_DP and their sum over a log-spaced separation grid");
  add_common(rates, inv, "CSV path (default <output.directory>/rates.csv)");
  RatesArgs rates_args;
  rates->add_option("--dx-min", rates_args.dx_min, "smallest separation [m]")->capture_default_str();
  rates->add_option("--dx-max", rates_args.dx_max, "largest separation [m]")->capture_default_str();
  rates->add_option("--points", rates_args.points, "number of grid points")->capture_default_str();

  auto* coherence = app.add_subcommand("coherence", "coherence C(t) for a static or oscillating separation");
  add_common(coherence, inv, "CSV path (default <output.directory>/coherence.csv)");
  CoherenceArgs coh;
  coherence->add_option("--mode", coh.mode, "static or dynamic")->capture_default_str();
  coherence->add_option("--dx", coh.dx, "separation; peak separation in dynamic mode [m]")->capture_default_str();
  coherence->add_option("--t-max", coh.t_max, "final time [s]")->capture_default_str();
  coherence->add_option("--points", coh.points, "number of time samples")->capture_default_str();
  coherence->add_option("--c0", coh.c0, "initial coherence, in (0, 1]")->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "synthetic (delta_x, gamma, sigma) dataset with multiplicative Gaussian noise");
  add_common(gen, inv, "CSV path (default <output.directory>/gen-data.csv)");
  add_override(gen, inv, "--lambda-true", "inference", "lambda_true", "generating CSL rate [1/s]");
  add_override(gen, inv, "--dpp-true", "inference", "dpp_true", "generating momentum diffusion [kg^2 m^2/s^3]");
  add_override(gen, inv, "--n-points", "inference", "n_points", "number of separations");
  add_override(gen, inv, "--noise", "inference", "noise", "relative noise sigma/gamma [dimensionless]");
  add_override(gen, inv, "--seed", "inference", "seed", "RNG seed [integer]");
  add_override(gen, inv, "--dx-min", "inference", "dx_min", "smallest separation [m] (default r_c/10)");
  add_override(gen, inv, "--dx-max", "inference", "dx_max", "largest separation [m] (default 10 r_c)");

  auto* fit = app.add_subcommand("fit", "Metropolis-Hastings posterior over (log10 lambda, D_pp)");
  add_common(fit, inv, "samples CSV path (default <output.directory>/fit-samples.csv); summary JSON goes next to it as <stem>.summary.json");
  FitArgs fit_args;
  fit->add_option("--data", fit_args.data, "dataset CSV written by gen-data")->required()->check(CLI::ExistingFile);
  add_override(fit, inv, "--chains", "inference", "chains", "number of chains (>= 2)");
  add_override(fit, inv, "--samples", "inference", "samples", "iterations per chain, burn-in included");
  add_override(fit, inv, "--burn", "inference", "burn", "burn-in iterations per chain (default 20% of samples)");
  add_override(fit, inv, "--seed", "inference", "seed", "RNG seed [integer]");
  add_override(fit, inv, "--dpp-prior-center", "inference", "dpp_center", "Gaussian prior centre for D_pp [kg^2 m^2/s^3]");
  add_override(fit, inv, "--dpp-prior-sigma", "inference", "dpp_sigma", "Gaussian prior width for D_pp [kg^2 m^2/s^3]");
  add_override(fit, inv, "--lambda-log-min", "inference", "lambda_log_min", "lower edge of the log10 lambda prior [log10(1/s)]");
  add_override(fit, inv, "--lambda-log-max", "inference", "lambda_log_max", "upper edge of the log10 lambda prior [log10(1/s)]");

  auto* exclude = app.add_subcommand("exclude", "detectability map over (lambda, r_c) at a threshold rate");
  add_common(exclude, inv, "CSV path (default <output.directory>/exclude.csv)");
  ExcludeArgs ex;
  exclude->add_option("--lambda-min", ex.request.lambda_min, "lower lambda [1/s]")->capture_default_str();
  exclude->add_option("--lambda-max", ex.request.lambda_max, "upper lambda [1/s]")->capture_default_str();
  exclude->add_option("--rc-min", ex.request.rc_min, "lower r_c [m]")->capture_default_str();
  exclude->add_option("--rc-max", ex.request.rc_max, "upper r_c [m]")->capture_default_str();
  exclude->add_option("--lambda-points", ex.request.lambda_points, "lambda grid size")->capture_default_str();
  exclude->add_option("--rc-points", ex.request.rc_points, "r_c grid size")->capture_default_str();
  exclude->add_option("--dx", ex.request.delta_x, "superposition size [m]")->capture_default_str();
  exclude->add_option("--gamma-min", ex.request.gamma_min, "detection threshold [1/s]")->capture_default_str();
  exclude->add_option("--mass", ex.mass, "particle mass [kg] (default from config)");

  auto* mass = app.add_subcommand("mass-scan", "plateau rate lambda (m/m0)^2 against mass, with an environmental comparison");
  add_common(mass, inv, "CSV path (default <output.directory>/mass-scan.csv)");
  MassScanArgs ms;
  mass->add_option("--mass-min", ms.mass_min_amu, "lightest mass [amu]")->capture_default_str();
  mass->add_option("--mass-max", ms.mass_max_amu, "heaviest mass [amu]")->capture_default_str();
  mass->add_option("--points", ms.points, "number of masses")->capture_default_str();
  mass->add_option("--lambda", ms.lambda, "CSL rate [1/s] (default collapse.lambda_csl)");
  mass->add_option("--dx", ms.dx, "separation for the environmental curve [m] (default r_c)");
  mass->add_flag("--no-environment", ms.no_environment, "skip the environmental comparison");

  StateArgs st;
  auto add_state = [&st](CLI::App* sub) {
    sub->add_option("--alpha", st.alpha, "cat amplitude |alpha| [dimensionless]")->capture_default_str();
    sub->add_option("--nmax", st.nmax, "Fock truncation (default max(4|alpha|^2 + 20, 32))");
    sub->add_option("--tau", st.tau, "evolution time Omega t [dimensionless]")->capture_default_str();
    sub->add_option("--kappa", st.kappa,
                    "localization coefficient D_pp x_zpf^2/(hbar^2 Omega) [dimensionless] (default from the diffusion budget)");
    sub->add_option("--gamma-m", st.gamma_m, "thermalization rate [1/s] (default trap.gamma_m)");
    sub->add_option("--n-th", st.n_th, "bath occupation [quanta] (default trap.n_th)");
  };
  auto* wig = app.add_subcommand("wigner", "Wigner function of an even cat, optionally after localization");
  add_common(wig, inv, "CSV path (default <output.directory>/wigner.csv)");
  add_state(wig);
  wig->add_option("--grid-points", st.grid_points, "nodes per phase-space axis")->capture_default_str();
  wig->add_option("--grid-extent", st.grid_extent, "half-width of the phase-space window [x_zpf and p_zpf] (default max(6, 2|alpha| + 5))");
  wig->add_option("--basis", st.basis, "fock (Lindblad) or position (localization kernel)")->capture_default_str();

  auto* evolve = app.add_subcommand("evolve", "Lindblad evolution of an even cat: trace, purity, coherence and <n>");
  add_common(evolve, inv, "CSV path (default <output.directory>/evolve.csv)");
  add_state(evolve);
  evolve->add_option("--records", st.records, "number of recorded time steps")->capture_default_str();
  evolve->add_option("--frame", st.frame, "rotating (H0 = hbar Omega n) or static (H0 = 0)")->capture_default_str();

  auto* derive = app.add_subcommand("derive", "print derived scales (mass [kg], x_zpf [m], eta, D_pp budget) as JSON");
  add_common(derive, inv, "optional JSON copy of the printed result");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << CSL_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const Config cfg = resolve_config(inv);
    for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
    std::vector<std::string> echo = args;
    if (*rates) return run_rates(cfg, inv, rates_args, echo, out);
    if (*coherence) return run_coherence(cfg, inv, coh, echo, out);
    if (*gen) return run_gen_data(cfg, inv, echo, out);
    if (*fit) return run_fit(cfg, inv, fit_args, echo, out, err);
    if (*exclude) return run_exclude(cfg, inv, ex, echo, out);
    if (*mass) return run_mass_scan(cfg, inv, ms, echo, out);
    if (*wig) return run_wigner(cfg, inv, st, echo, out);
    if (*evolve) return run_evolve(cfg, inv, st, echo, out);
    if (*derive) return run_derive(cfg, inv, out);
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << " (try --nmax " << e.suggested_nmax() << ")\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace csl
