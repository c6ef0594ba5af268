#include "csl/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"

namespace csl {

using nlohmann::json;

namespace {

const std::map<std::string, std::map<std::string, double>>& unit_table() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"length", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9},
                  {"pm", 1e-12}}},
      {"mass", {{"kg", 1.0}, {"g", 1e-3}, {"amu", constants::amu}, {"u", constants::amu},
                {"Da", constants::amu}}},
      {"density", {{"kg/m3", 1.0}, {"kg/m^3", 1.0}, {"g/cm3", 1e3}, {"g/cm^3", 1e3}}},
      {"temperature", {{"K", 1.0}, {"mK", 1e-3}}},
      {"pressure", {{"Pa", 1.0}, {"hPa", 1e2}, {"mbar", 1e2}, {"bar", 1e5},
                    {"Torr", 101325.0 / 760.0}}},
      {"angular_frequency", {{"rad/s", 1.0}, {"Hz", 2.0 * constants::pi},
                             {"kHz", 2e3 * constants::pi}, {"MHz", 2e6 * constants::pi}}},
      {"rate", {{"1/s", 1.0}, {"s^-1", 1.0}, {"Hz", 1.0}}},
      {"power", {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}}},
      {"area", {{"m2", 1.0}, {"m^2", 1.0}, {"nm2", 1e-18}, {"nm^2", 1e-18}}},
      {"diffusion", {{"kg2m2/s3", 1.0}, {"kg^2m^2/s^3", 1.0}}},
      {"time", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}}},
      {"dimensionless", {}},
  };
  return table;
}

// Section reader that tracks which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.contains(name_)) {
      node_ = root.at(name_);
      if (!node_.is_object()) throw ConfigError(fmt::format("{}: must be an object", name_));
    } else {
      node_ = json::object();
    }
  }

  std::optional<double> quantity(const std::string& key, const std::string& kind) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return std::nullopt;
    return parse_quantity(node_.at(key), kind, path(key));
  }

  template <class Int>
  std::optional<Int> integer(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return std::nullopt;
    const json& v = node_.at(key);
    if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
      throw ConfigError(fmt::format("{}: must be an integer", path(key)));
    }
    if (v.is_number_integer() && v.get<long long>() < 0) {
      throw ConfigError(fmt::format("{}: must be non-negative", path(key)));
    }
    return static_cast<Int>(v.get<double>());
  }

  std::optional<std::string> text(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key) || node_.at(key).is_null()) return std::nullopt;
    if (!node_.at(key).is_string()) throw ConfigError(fmt::format("{}: must be a string", path(key)));
    return node_.at(key).get<std::string>();
  }

  void reject_unknown() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(fmt::format("{}: unknown key", path(key)));
    }
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  json node_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

double parse_quantity(const json& value, const std::string& kind, const std::string& field_path) {
  const auto& table = unit_table();
  auto units = table.find(kind);
  if (units == table.end()) throw ConfigError(fmt::format("{}: unknown quantity kind {}", field_path, kind));

  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) {
    throw ConfigError(fmt::format("{}: expected a number or \"<value> <unit>\"", field_path));
  }
  std::istringstream in(value.get<std::string>());
  double number = 0.0;
  std::string unit;
  if (!(in >> number)) throw ConfigError(fmt::format("{}: cannot parse number", field_path));
  in >> unit;
  std::string rest;
  if (in >> rest) throw ConfigError(fmt::format("{}: trailing text '{}'", field_path, rest));
  if (unit.empty()) return number;
  auto factor = units->second.find(unit);
  if (factor == units->second.end()) {
    throw ConfigError(fmt::format("{}: unit '{}' not accepted for {}", field_path, unit, kind));
  }
  return number * factor->second;
}

Geometry Config::geometry() const {
  return Geometry{particle.resolved_mass(), particle.radius, collapse};
}

double Config::dx_min() const { return inference.dx_min.value_or(collapse.r_c / 10.0); }
double Config::dx_max() const { return inference.dx_max.value_or(collapse.r_c * 10.0); }
int Config::burn() const { return inference.burn.value_or(inference.samples / 5); }

double Config::dpp_center() const {
  if (inference.dpp_center) return *inference.dpp_center;
  if (trap.heating_rate) {
    return constants::hbar * particle.resolved_mass() * trap.angular_frequency * *trap.heating_rate;
  }
  return inference.dpp_true;
}

double Config::dpp_sigma() const {
  return inference.dpp_sigma.value_or(0.1 * dpp_center());
}

Config validate_config(const json& raw) {
  if (!raw.is_object()) throw ConfigError("config: top level must be a JSON object");
  static const std::set<std::string> sections = {"particle", "trap",      "gas",
                                                 "collapse", "inference", "output"};
  for (const auto& [key, _] : raw.items()) {
    if (!sections.count(key)) throw ConfigError(fmt::format("{}: unknown section", key));
  }

  Config cfg;

  Section particle(raw, "particle");
  if (auto v = particle.quantity("radius", "length")) cfg.particle.radius = *v;
  if (auto v = particle.quantity("density", "density")) cfg.particle.density = *v;
  cfg.particle.mass = particle.quantity("mass", "mass");
  if (auto v = particle.quantity("internal_temperature", "temperature")) {
    cfg.particle.internal_temperature = *v;
  }
  cfg.particle.blackbody_dpp = particle.quantity("blackbody_dpp", "diffusion");
  particle.reject_unknown();

  Section trap(raw, "trap");
  if (auto v = trap.quantity("angular_frequency", "angular_frequency")) cfg.trap.angular_frequency = *v;
  if (auto v = trap.quantity("laser_wavelength", "length")) cfg.trap.laser_wavelength = *v;
  if (auto v = trap.quantity("laser_power", "power")) cfg.trap.laser_power = *v;
  if (auto v = trap.quantity("scattering_rate", "rate")) cfg.trap.scattering_rate = *v;
  cfg.trap.heating_rate = trap.quantity("heating_rate", "rate");
  if (auto v = trap.quantity("gamma_m", "rate")) cfg.thermalization.gamma_m = *v;
  if (auto v = trap.quantity("n_th", "dimensionless")) cfg.thermalization.n_th = *v;
  trap.reject_unknown();

  Section gas(raw, "gas");
  if (auto v = gas.quantity("pressure", "pressure")) cfg.gas.pressure = *v;
  if (auto v = gas.quantity("temperature", "temperature")) cfg.gas.temperature = *v;
  if (auto v = gas.quantity("molecule_mass", "mass")) cfg.gas.molecule_mass = *v;
  auto cross_section = gas.quantity("cross_section", "area");
  gas.reject_unknown();

  Section collapse(raw, "collapse");
  if (auto v = collapse.quantity("lambda_csl", "rate")) cfg.collapse.lambda_csl = *v;
  if (auto v = collapse.quantity("r_c", "length")) cfg.collapse.r_c = *v;
  if (auto v = collapse.quantity("m0", "mass")) cfg.collapse.m0 = *v;
  if (auto v = collapse.quantity("r0_dp", "length")) cfg.collapse.r0_dp = *v;
  collapse.reject_unknown();

  Section inference(raw, "inference");
  auto& inf = cfg.inference;
  if (auto v = inference.quantity("lambda_log_min", "dimensionless")) inf.lambda_log_min = *v;
  if (auto v = inference.quantity("lambda_log_max", "dimensionless")) inf.lambda_log_max = *v;
  inf.dpp_center = inference.quantity("dpp_center", "diffusion");
  inf.dpp_sigma = inference.quantity("dpp_sigma", "diffusion");
  if (auto v = inference.integer<int>("chains")) inf.chains = *v;
  if (auto v = inference.integer<int>("samples")) inf.samples = *v;
  inf.burn = inference.integer<int>("burn");
  if (auto v = inference.integer<std::uint64_t>("seed")) inf.seed = *v;
  if (auto v = inference.quantity("noise", "dimensionless")) inf.noise = *v;
  if (auto v = inference.integer<int>("n_points")) inf.n_points = *v;
  if (auto v = inference.quantity("lambda_true", "rate")) inf.lambda_true = *v;
  if (auto v = inference.quantity("dpp_true", "diffusion")) inf.dpp_true = *v;
  inf.dx_min = inference.quantity("dx_min", "length");
  inf.dx_max = inference.quantity("dx_max", "length");
  inference.reject_unknown();

  Section output(raw, "output");
  if (auto v = output.text("directory")) cfg.output.directory = *v;
  output.reject_unknown();

  check(cfg.particle);
  check(cfg.trap);
  check(cfg.collapse);
  check(cfg.thermalization);

  const double geometric = cfg.particle.geometric_mass();
  if (cfg.particle.mass && std::abs(*cfg.particle.mass - geometric) > 1e-6 * geometric) {
    cfg.warnings.push_back(fmt::format(
        "particle.mass {:.6g} kg overrides geometric mass {:.6g} kg (ratio {:.4g})",
        *cfg.particle.mass, geometric, *cfg.particle.mass / geometric));
  }

  if (cross_section) {
    cfg.gas.cross_section = *cross_section;
  } else {
    cfg.gas.cross_section = constants::pi * cfg.particle.radius * cfg.particle.radius;
    cfg.notes.push_back("gas.cross_section defaulted to geometric pi R^2");
  }
  check(cfg.gas);

  if (!cfg.particle.blackbody_dpp) {
    cfg.notes.push_back("particle.blackbody_dpp absent; blackbody channel set to 0");
  }

  require(inf.lambda_log_min < inf.lambda_log_max,
          "inference.lambda_log_min: must be below inference.lambda_log_max");
  require(inf.chains >= 2, "inference.chains: must be >= 2");
  require(inf.samples >= 1000, "inference.samples: must be >= 1000");
  require(cfg.burn() < inf.samples, "inference.burn: must be below inference.samples");
  require(std::isfinite(inf.noise) && inf.noise > 0.0, "inference.noise: must be > 0");
  require(inf.n_points >= 1, "inference.n_points: must be >= 1");
  require(std::isfinite(inf.lambda_true) && inf.lambda_true >= 0.0,
          "inference.lambda_true: must be >= 0");
  require(std::isfinite(inf.dpp_true) && inf.dpp_true >= 0.0, "inference.dpp_true: must be >= 0");
  require(cfg.dx_min() > 0.0 && cfg.dx_min() < cfg.dx_max(),
          "inference.dx_min: must satisfy 0 < dx_min < dx_max");
  require(std::isfinite(cfg.dpp_sigma()) && cfg.dpp_sigma() > 0.0,
          "inference.dpp_sigma: must be > 0");
  return cfg;
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  json raw;
  try {
    in >> raw;
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!raw.is_object()) throw ConfigError(fmt::format("{}: top level must be an object", path.string()));
  return raw;
}

Config load_config(const std::filesystem::path& path) { return validate_config(read_config_json(path)); }

Config default_config() { return validate_config(json::object()); }

json to_json(const Config& cfg) {
  json j;
  const auto& p = cfg.particle;
  j["particle"] = {{"radius", p.radius},
                   {"density", p.density},
                   {"mass", p.resolved_mass()},
                   {"mass_explicit", p.mass.has_value()},
                   {"internal_temperature", p.internal_temperature},
                   {"blackbody_dpp", p.blackbody_dpp.value_or(0.0)}};
  j["trap"] = {{"angular_frequency", cfg.trap.angular_frequency},
               {"laser_wavelength", cfg.trap.laser_wavelength},
               {"laser_power", cfg.trap.laser_power},
               {"scattering_rate", cfg.trap.scattering_rate},
               {"gamma_m", cfg.thermalization.gamma_m},
               {"n_th", cfg.thermalization.n_th}};
  if (cfg.trap.heating_rate) j["trap"]["heating_rate"] = *cfg.trap.heating_rate;
  j["gas"] = {{"pressure", cfg.gas.pressure},
              {"temperature", cfg.gas.temperature},
              {"molecule_mass", cfg.gas.molecule_mass},
              {"cross_section", cfg.gas.cross_section}};
  j["collapse"] = {{"lambda_csl", cfg.collapse.lambda_csl},
                   {"r_c", cfg.collapse.r_c},
                   {"m0", cfg.collapse.m0},
                   {"r0_dp", cfg.collapse.r0_dp}};
  const auto& inf = cfg.inference;
  j["inference"] = {{"lambda_log_min", inf.lambda_log_min},
                    {"lambda_log_max", inf.lambda_log_max},
                    {"dpp_center", cfg.dpp_center()},
                    {"dpp_sigma", cfg.dpp_sigma()},
                    {"chains", inf.chains},
                    {"samples", inf.samples},
                    {"burn", cfg.burn()},
                    {"seed", inf.seed},
                    {"noise", inf.noise},
                    {"n_points", inf.n_points},
                    {"lambda_true", inf.lambda_true},
                    {"dpp_true", inf.dpp_true},
                    {"dx_min", cfg.dx_min()},
                    {"dx_max", cfg.dx_max()}};
  j["output"] = {{"directory", cfg.output.directory}};
  return j;
}

}  // namespace csl
