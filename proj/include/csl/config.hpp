#pragma once

#include <filesystem>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csl/params.hpp"

namespace csl {

/// Settings consumed by gen-data, fit and the narrowing study.
struct InferenceSettings {
  double lambda_log_min = -18.0;  // log10(1/s)
  double lambda_log_max = -6.0;
  std::optional<double> dpp_center;  // kg^2 m^2 / s^3
  std::optional<double> dpp_sigma;
  int chains = 4;
  int samples = 20000;
  std::optional<int> burn;
  std::uint64_t seed = 1;
  double noise = 0.05;
  int n_points = 30;
  double lambda_true = 1e-21;
  double dpp_true = 3.0e-56;
  std::optional<double> dx_min;  // m
  std::optional<double> dx_max;
};

struct OutputSettings {
  std::string directory = ".";
};

/// Fully resolved, validated configuration. Immutable after validate_config().
struct Config {
  ParticleSpec particle;
  TrapSpec trap;
  GasSpec gas;
  CollapseParams collapse;
  ThermalizationSpec thermalization;
  InferenceSettings inference;
  OutputSettings output;

  std::vector<std::string> warnings;  // e.g. explicit mass disagreeing with geometry
  std::vector<std::string> notes;     // provenance of defaulted values

  Geometry geometry() const;
  double dx_min() const;
  double dx_max() const;
  int burn() const;
  /// Prior centre for D_pp: explicit value, else hbar m Omega n_dot from the
  /// trap heating rate, else the generating value dpp_true.
  double dpp_center() const;
  double dpp_sigma() const;
};

/// Parse and validate a raw JSON document. Fills defaults, converts units,
/// rejects unknown keys. Throws ConfigError naming the offending field path.
Config validate_config(const nlohmann::json& raw);

/// Raw JSON document from disk, before validation.
nlohmann::json read_config_json(const std::filesystem::path& path);
Config load_config(const std::filesystem::path& path);

/// Default configuration (all sections absent).
Config default_config();

/// Resolved configuration in SI units, for echoing into artifacts.
nlohmann::json to_json(const Config& cfg);

/// Parse "<number> <unit>" or a bare number into SI for the given quantity kind.
/// Kinds: length, mass, density, temperature, pressure, angular_frequency, rate,
/// power, area, diffusion, dimensionless.
double parse_quantity(const nlohmann::json& value, const std::string& kind,
                      const std::string& field_path);

}  // namespace csl
