#include "csl/scan.hpp"

#include <cmath>

#include "csl/constants.hpp"
#include "csl/dynamics.hpp"
#include "csl/error.hpp"
#include "csl/parallel.hpp"
#include "csl/rates.hpp"

namespace csl {

ExclusionMap scan_exclusion(const ExclusionRequest& r) {
  if (!(r.lambda_min > 0.0 && r.lambda_max > r.lambda_min && r.rc_min > 0.0 && r.rc_max > r.rc_min)) {
    throw ConfigError("exclude: ranges must be positive and increasing");
  }
  if (r.lambda_points < 2 || r.rc_points < 2) throw ConfigError("exclude: need >= 2 points per axis");
  if (!(r.mass > 0.0 && r.radius > 0.0 && r.delta_x > 0.0 && r.gamma_min > 0.0 && r.m0 > 0.0)) {
    throw ConfigError("exclude: mass, radius, delta_x, gamma_min and m0 must be > 0");
  }

  ExclusionMap map;
  map.lambda_axis = log_space(r.lambda_min, r.lambda_max, r.lambda_points);
  map.rc_axis = log_space(r.rc_min, r.rc_max, r.rc_points);
  map.gamma_min = r.gamma_min;
  map.mass = r.mass;
  map.delta_x = r.delta_x;
  const std::size_t nl = map.lambda_axis.size();
  const std::size_t nr = map.rc_axis.size();
  map.detectable.assign(nl * nr, 0);
  map.gamma.assign(nl * nr, 0.0);

  parallel_for(nl, r.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < nr; ++j) {
      CollapseParams c;
      c.lambda_csl = map.lambda_axis[i];
      c.r_c = map.rc_axis[j];
      c.m0 = r.m0;
      const double g = gamma_csl(c, r.mass, r.radius, r.delta_x);
      map.gamma[i * nr + j] = g;
      map.detectable[i * nr + j] = g >= r.gamma_min ? 1 : 0;
    }
  });
  return map;
}

MassScan scan_mass(double lambda_csl, double mass_min, double mass_max, int points, double m0,
                   const std::optional<EnvironmentComparison>& environment) {
  if (!(mass_min > 0.0 && mass_max > mass_min)) throw ConfigError("mass-scan: mass range must be positive");
  if (points < 2) throw ConfigError("mass-scan: need >= 2 points");
  if (!(lambda_csl >= 0.0) || !(m0 > 0.0)) throw ConfigError("mass-scan: need lambda >= 0 and m0 > 0");

  MassScan out;
  CollapseParams c;
  c.lambda_csl = lambda_csl;
  c.m0 = m0;
  for (double m : log_space(mass_min, mass_max, points)) {
    MassPoint p;
    p.mass = m;
    p.gamma_csl_max = gamma_csl_max(c, m);
    if (environment) {
      GasSpec gas = environment->gas;
      const double radius = std::cbrt(3.0 * m / (4.0 * constants::pi * environment->density));
      gas.cross_section = constants::pi * radius * radius;
      const double dpp = d_pp_gas(gas, m) + environment->extra_dpp;
      p.gamma_env = gamma_env(dpp, environment->delta_x);
    }
    out.points.push_back(p);
  }

  if (environment) {
    for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
      const auto& a = out.points[i];
      const auto& b = out.points[i + 1];
      const double fa = std::log(a.gamma_csl_max) - std::log(a.gamma_env);
      const double fb = std::log(b.gamma_csl_max) - std::log(b.gamma_env);
      if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
      if ((fa <= 0.0) != (fb <= 0.0)) {
        const double t = fa / (fa - fb);
        out.crossings.push_back(std::exp(std::log(a.mass) + t * (std::log(b.mass) - std::log(a.mass))));
      }
    }
  }
  return out;
}

std::vector<SeparationCurve> scan_rates_vs_separation(const Config& cfg,
                                                      const std::vector<double>& masses,
                                                      const std::vector<double>& dx_grid) {
  const double dpp = diffusion_budget(cfg).total;
  std::vector<SeparationCurve> curves;
  for (double m : masses) {
    if (!(m > 0.0)) throw ConfigError("rates: masses must be > 0");
    SeparationCurve curve;
    curve.mass = m;
    for (double dx : dx_grid) {
      const double env = gamma_env(dpp, dx);
      const double csl = gamma_csl(cfg.collapse, m, cfg.particle.radius, dx);
      curve.delta_x.push_back(dx);
      curve.gamma_env.push_back(env);
      curve.gamma_csl.push_back(csl);
      curve.gamma_total.push_back(env + csl);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  if (x.size() != y.size() || x.size() < 2 || i >= x.size()) {
    throw ConfigError("log_log_slope: index out of range");
  }
  const std::size_t lo = i == 0 ? 0 : i - 1;
  const std::size_t hi = i + 1 < x.size() ? i + 1 : i;
  return (std::log(y[hi]) - std::log(y[lo])) / (std::log(x[hi]) - std::log(x[lo]));
}

}  // namespace csl
