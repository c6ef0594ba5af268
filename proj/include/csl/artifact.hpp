#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "csl/dynamics.hpp"

namespace csl {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Everything needed to rerun a subcommand. The wall-clock duration only goes to
/// the sibling manifest JSON so the data files stay byte-identical between runs.
struct RunManifest {
  std::string subcommand;
  std::string version;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> arguments;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;
  // Subcommand-specific "# key: value" header lines, in insertion order.
  std::vector<std::pair<std::string, std::string>> metadata;

  void add(const std::string& key, const std::string& value) { metadata.emplace_back(key, value); }
  void add(const std::string& key, double value);

  std::vector<std::string> header_lines() const;
  nlohmann::json to_json() const;
};

/// 17 significant digits, shortest exact round-trip format.
std::string format_number(double value);

/// `#` header, column row, data rows. Refuses NaN/inf with NumericalError before
/// touching the file; I/O failures throw ConfigError naming the path.
void write_table(const std::filesystem::path& path, const Table& table, const RunManifest& manifest);

/// Pretty-printed with sorted keys.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// `<path>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& artifact);
void write_manifest(const std::filesystem::path& artifact, const RunManifest& manifest);

Table dataset_table(const RateDataset& data);
/// Adds seed, truth and resample count to the manifest metadata.
void describe_dataset(const RateDataset& data, RunManifest& manifest);
/// Parse a gen-data CSV. Truth and seed come from the header when present.
RateDataset read_dataset(const std::filesystem::path& path);

}  // namespace csl
