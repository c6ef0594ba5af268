#pragma once

// CODATA 2018 values, SI units.
namespace csl::constants {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J / K
inline constexpr double gravitational = 6.67430e-11;   // m^3 / (kg s^2)
inline constexpr double amu = 1.66053907e-27;          // kg
inline constexpr double pi = 3.14159265358979323846;

}  // namespace csl::constants
