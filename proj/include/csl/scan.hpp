#pragma once

#include <optional>
#include <vector>

#include "csl/config.hpp"
#include "csl/params.hpp"

namespace csl {

struct ExclusionRequest {
  double lambda_min = 1e-24;  // 1/s
  double lambda_max = 1e-16;
  double rc_min = 3.1622776601683795e-9;  // 10^-8.5 m
  double rc_max = 3.1622776601683795e-7;  // 10^-6.5 m
  int lambda_points = 81;
  int rc_points = 41;
  double mass = 1e-17;        // kg
  double radius = 50e-9;      // m
  double delta_x = 200e-9;    // m
  double gamma_min = 0.05;    // 1/s
  double m0 = 1.66e-27;       // kg
  unsigned threads = 1;
};

struct ExclusionMap {
  std::vector<double> lambda_axis;  // 1/s
  std::vector<double> rc_axis;      // m
  std::vector<char> detectable;     // row-major, index = i_lambda * rc_axis.size() + i_rc
  std::vector<double> gamma;        // gamma_csl per cell, same layout
  double gamma_min = 0.0;
  double mass = 0.0;
  double delta_x = 0.0;

  bool at(std::size_t i_lambda, std::size_t i_rc) const {
    return detectable[i_lambda * rc_axis.size() + i_rc] != 0;
  }
};

ExclusionMap scan_exclusion(const ExclusionRequest& request);

struct MassPoint {
  double mass = 0.0;           // kg
  double gamma_csl_max = 0.0;  // 1/s
  double gamma_env = 0.0;      // 1/s, 0 when no comparison was requested
};

/// Environmental comparison for scan_mass: each mass gets a sphere radius from
/// `density`, its own gas cross section pi R^2, and the fixed trap/blackbody terms.
struct EnvironmentComparison {
  GasSpec gas;
  double density = 2200.0;      // kg / m^3
  double extra_dpp = 0.0;       // mass-independent terms, kg^2 m^2 / s^3
  double delta_x = 100e-9;      // m
};

struct MassScan {
  std::vector<MassPoint> points;
  std::vector<double> crossings;  // masses (kg) where gamma_csl_max = gamma_env
};

MassScan scan_mass(double lambda_csl, double mass_min, double mass_max, int points, double m0,
                   const std::optional<EnvironmentComparison>& environment = std::nullopt);

struct SeparationCurve {
  double mass = 0.0;
  std::vector<double> delta_x;
  std::vector<double> gamma_env;
  std::vector<double> gamma_csl;
  std::vector<double> gamma_total;
};

/// One curve per mass; D_pp comes from the config's diffusion budget.
std::vector<SeparationCurve> scan_rates_vs_separation(const Config& cfg,
                                                      const std::vector<double>& masses,
                                                      const std::vector<double>& dx_grid);

/// Centred finite-difference slope of log y against log x at index i.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t i);

}  // namespace csl
