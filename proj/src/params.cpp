#include "csl/params.hpp"

#include <cmath>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"

namespace csl {

namespace {

void require(bool ok, const char* field, const char* rule, double value) {
  if (!ok) {
    throw ConfigError(fmt::format("{}: must be {} (got {:g})", field, rule, value));
  }
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double ParticleSpec::geometric_mass() const {
  return 4.0 / 3.0 * constants::pi * radius * radius * radius * density;
}

double ParticleSpec::resolved_mass() const { return mass ? *mass : geometric_mass(); }

double GasSpec::thermal_speed() const {
  return std::sqrt(2.0 * constants::k_boltzmann * temperature / molecule_mass);
}

double zero_point_width(double mass, double omega) {
  return std::sqrt(constants::hbar / (2.0 * mass * omega));
}

DerivedScales derive_scales(const ParticleSpec& particle, const TrapSpec& trap) {
  check(particle);
  check(trap);
  DerivedScales s;
  s.mass = particle.resolved_mass();
  if (!finite_positive(s.mass)) {
    throw ConfigError(fmt::format("particle.mass: derived mass {:g} kg is not positive", s.mass));
  }
  s.x_zpf = zero_point_width(s.mass, trap.angular_frequency);
  s.k_optical = 2.0 * constants::pi / trap.laser_wavelength;
  s.lamb_dicke = s.k_optical * s.x_zpf;
  return s;
}

void check(const ParticleSpec& p) {
  require(finite_positive(p.radius), "particle.radius", "> 0", p.radius);
  require(finite_positive(p.density), "particle.density", "> 0", p.density);
  require(std::isfinite(p.internal_temperature) && p.internal_temperature >= 0.0,
          "particle.internal_temperature", ">= 0", p.internal_temperature);
  if (p.mass) require(finite_positive(*p.mass), "particle.mass", "> 0", *p.mass);
  if (p.blackbody_dpp) {
    require(std::isfinite(*p.blackbody_dpp) && *p.blackbody_dpp >= 0.0, "particle.blackbody_dpp",
            ">= 0", *p.blackbody_dpp);
  }
}

void check(const TrapSpec& t) {
  require(finite_positive(t.angular_frequency), "trap.angular_frequency", "> 0",
          t.angular_frequency);
  require(finite_positive(t.laser_wavelength), "trap.laser_wavelength", "> 0", t.laser_wavelength);
  require(std::isfinite(t.laser_power) && t.laser_power >= 0.0, "trap.laser_power", ">= 0",
          t.laser_power);
  require(std::isfinite(t.scattering_rate) && t.scattering_rate >= 0.0, "trap.scattering_rate",
          ">= 0", t.scattering_rate);
  if (t.heating_rate) {
    require(std::isfinite(*t.heating_rate) && *t.heating_rate >= 0.0, "trap.heating_rate", ">= 0",
            *t.heating_rate);
  }
}

void check(const GasSpec& g) {
  require(std::isfinite(g.pressure) && g.pressure >= 0.0, "gas.pressure", ">= 0", g.pressure);
  require(finite_positive(g.temperature), "gas.temperature", "> 0", g.temperature);
  require(finite_positive(g.molecule_mass), "gas.molecule_mass", "> 0", g.molecule_mass);
  require(finite_positive(g.cross_section), "gas.cross_section", "> 0", g.cross_section);
}

void check(const CollapseParams& c) {
  require(std::isfinite(c.lambda_csl) && c.lambda_csl >= 0.0, "collapse.lambda_csl", ">= 0",
          c.lambda_csl);
  require(finite_positive(c.r_c), "collapse.r_c", "> 0", c.r_c);
  require(finite_positive(c.m0), "collapse.m0", "> 0", c.m0);
  require(finite_positive(c.r0_dp), "collapse.r0_dp", "> 0", c.r0_dp);
}

void check(const ThermalizationSpec& t) {
  require(std::isfinite(t.gamma_m) && t.gamma_m >= 0.0, "trap.gamma_m", ">= 0", t.gamma_m);
  require(std::isfinite(t.n_th) && t.n_th >= 0.0, "trap.n_th", ">= 0", t.n_th);
}

}  // namespace csl
