#pragma once

#include <functional>

#include "csl/config.hpp"
#include "csl/params.hpp"

namespace csl {

/// Momentum-diffusion constants per channel, kg^2 m^2 / s^3.
struct DiffusionBudget {
  double gas = 0.0;
  double trap = 0.0;
  double blackbody = 0.0;
  double total = 0.0;
};

struct RatePoint {
  double delta_x = 0.0;  // m
  double gamma = 0.0;    // 1/s
};

using RateFunction = std::function<double(double delta_x)>;

// Environmental channels.
double d_pp_gas(const GasSpec& gas, double particle_mass);
double d_pp_trap(double scattering_rate, double k_optical);
/// Pass-through of the configured blackbody aggregate; negative input throws ConfigError.
double d_pp_blackbody(double aggregate);
DiffusionBudget diffusion_budget(const Config& cfg);

/// D_pp dx^2 / hbar^2.
double gamma_env(double d_pp, double delta_x);

/// D_pp = hbar m Omega n_dot and its inverse.
double calibrate_dpp_from_heating(double heating_rate, double mass, double omega);
double heating_from_dpp(double d_pp, double mass, double omega);

/// 1 - (1+v^2)^(-3/2) exp(-u^2 / (4 (1+v^2))), u = dx/r_C, v = R/r_C.
double csl_form_factor(double u, double v);

double gamma_csl(const CollapseParams& collapse, double mass, double radius, double delta_x);
/// Quadratic small-separation law lambda (m/m0)^2 dx^2 / (4 r_C^2 (1 + R^2/r_C^2)).
/// Note it carries no (1+v^2)^(-3/2) factor and no dx = 0 offset.
double gamma_csl_small_sep(const CollapseParams& collapse, double mass, double radius,
                           double delta_x);
/// Plateau value lambda (m/m0)^2.
double gamma_csl_max(const CollapseParams& collapse, double mass);

/// Diosi-Penrose rate with cutoff r0.
double gamma_dp(double mass, double r0, double delta_x);

/// Fit model: gamma_env + gamma_csl. DP is not part of it.
double gamma_total(double d_pp_total, const CollapseParams& collapse, double mass, double radius,
                   double delta_x);
double gamma_total(double d_pp_total, const Geometry& geometry, double delta_x);

/// Mean of rate(2 |alpha| x_zpf |cos(Omega t + phase)|) over one period 2 pi / Omega,
/// adaptive quadrature to 1e-8 relative.
double cycle_averaged_gamma(const RateFunction& rate, double alpha_mag, double x_zpf, double omega,
                            double phase = 0.0);

}  // namespace csl
