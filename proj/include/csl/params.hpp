#pragma once

#include <optional>
#include <string>
#include <vector>

namespace csl {

// All quantities are SI. Human units only exist in config.cpp.

struct ParticleSpec {
  double radius = 50e-9;               // m
  double density = 2200.0;             // kg / m^3
  std::optional<double> mass;          // kg, overrides geometry when set
  double internal_temperature = 20.0;  // K
  std::optional<double> blackbody_dpp; // kg^2 m^2 / s^3, aggregate emit + abs + scat

  /// Mass from geometry, (4/3) pi R^3 rho.
  double geometric_mass() const;
  /// Explicit mass if present, otherwise geometric_mass().
  double resolved_mass() const;
};

struct TrapSpec {
  double angular_frequency = 2.0 * 3.14159265358979323846 * 1e5;  // rad / s
  double laser_wavelength = 1064e-9;                               // m
  double laser_power = 5e-3;                                       // W
  double scattering_rate = 0.0;                                    // photons / s
  std::optional<double> heating_rate;                              // quanta / s
};

struct GasSpec {
  double pressure = 1e-13;        // Pa
  double temperature = 5.0;       // K
  double molecule_mass = 4.65e-26; // kg (N2)
  double cross_section = 0.0;     // m^2; 0 means "not yet resolved"

  /// Mean thermal speed sqrt(2 k_B T / m_g).
  double thermal_speed() const;
};

struct CollapseParams {
  double lambda_csl = 1e-21;  // 1/s, 0 encodes the null hypothesis
  double r_c = 100e-9;        // m
  double m0 = 1.66e-27;       // kg
  double r0_dp = 1e-10;       // m
};

struct ThermalizationSpec {
  double gamma_m = 0.0;  // 1/s
  double n_th = 0.0;
};

struct DerivedScales {
  double mass = 0.0;       // kg
  double x_zpf = 0.0;      // m
  double lamb_dicke = 0.0;
  double k_optical = 0.0;  // 1/m
};

/// Zero-point width, Lamb-Dicke parameter and optical wavevector.
/// Throws ConfigError when the resolved mass is not finite and positive.
DerivedScales derive_scales(const ParticleSpec& particle, const TrapSpec& trap);

/// sqrt(hbar / (2 m omega)).
double zero_point_width(double mass, double omega);

void check(const ParticleSpec& p);
void check(const TrapSpec& t);
void check(const GasSpec& g);
void check(const CollapseParams& c);
void check(const ThermalizationSpec& t);

/// Mass, radius and CSL constants needed by every rate model evaluated
/// on a single particle.
struct Geometry {
  double mass = 1e-17;
  double radius = 50e-9;
  CollapseParams collapse;
};

}  // namespace csl
