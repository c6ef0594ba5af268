#include "csl/rates.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/quadrature.hpp"

namespace csl {

using constants::hbar;
using constants::pi;

double d_pp_gas(const GasSpec& gas, double particle_mass) {
  if (gas.pressure == 0.0) return 0.0;
  const double m = particle_mass;
  const double mg = gas.molecule_mass;
  const double reduced = m / (m + mg);
  return 8.0 / std::sqrt(2.0 * pi) * (gas.pressure / gas.thermal_speed()) * reduced * reduced * mg *
         gas.cross_section;
}

double d_pp_trap(double scattering_rate, double k_optical) {
  const double recoil = hbar * k_optical;
  return 2.0 / 3.0 * scattering_rate * recoil * recoil;
}

double d_pp_blackbody(double aggregate) {
  if (!(aggregate >= 0.0)) throw ConfigError("particle.blackbody_dpp: must be >= 0");
  return aggregate;
}

DiffusionBudget diffusion_budget(const Config& cfg) {
  const auto scales = derive_scales(cfg.particle, cfg.trap);
  DiffusionBudget b;
  b.gas = d_pp_gas(cfg.gas, scales.mass);
  b.trap = d_pp_trap(cfg.trap.scattering_rate, scales.k_optical);
  b.blackbody = d_pp_blackbody(cfg.particle.blackbody_dpp.value_or(0.0));
  b.total = b.gas + b.trap + b.blackbody;
  return b;
}

double gamma_env(double d_pp, double delta_x) { return d_pp * delta_x * delta_x / (hbar * hbar); }

double calibrate_dpp_from_heating(double heating_rate, double mass, double omega) {
  return hbar * mass * omega * heating_rate;
}

double heating_from_dpp(double d_pp, double mass, double omega) {
  return d_pp / (hbar * mass * omega);
}

double csl_form_factor(double u, double v) {
  const double w = 1.0 + v * v;
  const double c = w * std::sqrt(w);  // (1+v^2)^{3/2}
  const double s = u * u / (4.0 * w);
  // 1 - e^{-s}/c written so that v = 0, u -> 0 keeps full relative precision.
  return ((c - 1.0) - std::expm1(-s)) / c;
}

double gamma_csl_max(const CollapseParams& collapse, double mass) {
  const double ratio = mass / collapse.m0;
  return collapse.lambda_csl * ratio * ratio;
}

double gamma_csl(const CollapseParams& collapse, double mass, double radius, double delta_x) {
  if (collapse.lambda_csl == 0.0) return 0.0;
  return gamma_csl_max(collapse, mass) *
         csl_form_factor(delta_x / collapse.r_c, radius / collapse.r_c);
}

double gamma_csl_small_sep(const CollapseParams& collapse, double mass, double radius,
                           double delta_x) {
  const double v = radius / collapse.r_c;
  return gamma_csl_max(collapse, mass) * delta_x * delta_x /
         (4.0 * collapse.r_c * collapse.r_c * (1.0 + v * v));
}

double gamma_dp(double mass, double r0, double delta_x) {
  const double prefactor =
      constants::gravitational * mass * mass / (hbar * std::sqrt(pi) * r0);
  const double root = std::sqrt(r0 * r0 + delta_x * delta_x);
  // 1 - r0/root without cancellation at small dx.
  return prefactor * delta_x * delta_x / (root * (root + r0));
}

double gamma_total(double d_pp_total, const CollapseParams& collapse, double mass, double radius,
                   double delta_x) {
  return gamma_env(d_pp_total, delta_x) + gamma_csl(collapse, mass, radius, delta_x);
}

double gamma_total(double d_pp_total, const Geometry& geometry, double delta_x) {
  return gamma_total(d_pp_total, geometry.collapse, geometry.mass, geometry.radius, delta_x);
}

double cycle_averaged_gamma(const RateFunction& rate, double alpha_mag, double x_zpf, double omega,
                            double phase) {
  // |cos| has period pi in its argument.
  phase = std::fmod(phase, pi);
  if (phase < 0.0) phase += pi;
  const double period = 2.0 * pi / omega;
  const double dx_max = 2.0 * alpha_mag * x_zpf;
  auto integrand = [&](double t) { return rate(dx_max * std::abs(std::cos(omega * t + phase))); };

  std::vector<double> kinks;
  for (int k = -2; k <= 4; ++k) {
    const double t = (pi / 2.0 + k * pi - phase) / omega;
    if (t > 0.0 && t < period) kinks.push_back(t);
  }
  std::sort(kinks.begin(), kinks.end());
  return integrate_piecewise(integrand, 0.0, period, kinks, 1e-8) / period;
}

}  // namespace csl
