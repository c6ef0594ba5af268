#include "csl/artifact.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "csl/error.hpp"

namespace csl {

namespace fs = std::filesystem;

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void RunManifest::add(const std::string& key, double value) { add(key, format_number(value)); }

std::vector<std::string> RunManifest::header_lines() const {
  std::vector<std::string> lines;
  lines.push_back("subcommand: " + subcommand);
  lines.push_back("version: " + version);
  lines.push_back("seed: " + std::to_string(seed));
  for (const auto& [k, v] : metadata) lines.push_back(k + ": " + v);
  lines.push_back("config: " + config.dump());
  return lines;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["version"] = version;
  j["seed"] = seed;
  j["config"] = config;
  j["arguments"] = arguments;
  j["outputs"] = outputs;
  j["duration_seconds"] = duration_seconds;
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& [k, v] : metadata) meta[k] = v;
  j["metadata"] = meta;
  return j;
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw ConfigError(fmt::format("{}: directory does not exist", path.string()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("{}: cannot open for writing", path.string()));
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw ConfigError(fmt::format("{}: write failed", path.string()));
}

}  // namespace

void write_table(const fs::path& path, const Table& table, const RunManifest& manifest) {
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.columns.size()) {
      throw NumericalError(fmt::format("{}: row {} has {} cells, expected {}", path.string(), r,
                                       row.size(), table.columns.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!std::isfinite(row[c])) {
        throw NumericalError(fmt::format("{}: refusing to write non-finite value in row {}, column '{}'",
                                         path.string(), r, table.columns[c]));
      }
    }
  }
  auto out = open_for_write(path);
  for (const auto& line : manifest.header_lines()) out << "# " << line << '\n';
  out << "# manifest: " << manifest_path(path).filename().string() << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  finish(out, path);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

fs::path manifest_path(const fs::path& artifact) {
  fs::path p = artifact;
  p += ".manifest.json";
  return p;
}

void write_manifest(const fs::path& artifact, const RunManifest& manifest) {
  write_json(manifest_path(artifact), manifest.to_json());
}

Table dataset_table(const RateDataset& data) {
  Table t;
  t.columns = {"delta_x", "gamma", "sigma"};
  for (const auto& p : data.points) t.rows.push_back({p.delta_x, p.gamma, p.sigma});
  return t;
}

void describe_dataset(const RateDataset& data, RunManifest& manifest) {
  manifest.seed = data.seed;
  if (data.truth) {
    manifest.add("truth_lambda_csl", data.truth->lambda_csl);
    manifest.add("truth_d_pp", data.truth->d_pp);
  }
  manifest.add("resampled", std::to_string(data.resampled));
}

namespace {

double parse_double(const std::string& text, const fs::path& path, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError(fmt::format("{}:{}: cannot parse number '{}'", path.string(), line, text));
  }
  return v;
}

}  // namespace

RateDataset read_dataset(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open dataset", path.string()));

  RateDataset data;
  std::optional<double> truth_lambda, truth_dpp;
  bool have_columns = false;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      auto trim = [](std::string& s) {
        const auto b = s.find_first_not_of(' ');
        const auto e = s.find_last_not_of(' ');
        s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
      };
      trim(key);
      trim(value);
      if (key == "seed") data.seed = std::stoull(value);
      else if (key == "truth_lambda_csl") truth_lambda = parse_double(value, path, number);
      else if (key == "truth_d_pp") truth_dpp = parse_double(value, path, number);
      else if (key == "resampled") data.resampled = std::stoi(value);
      continue;
    }
    if (!have_columns) {
      if (line != "delta_x,gamma,sigma") {
        throw ConfigError(fmt::format("{}:{}: expected columns delta_x,gamma,sigma", path.string(), number));
      }
      have_columns = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(parse_double(cell, path, number));
    if (cells.size() != 3) {
      throw ConfigError(fmt::format("{}:{}: expected 3 columns, found {}", path.string(), number, cells.size()));
    }
    data.points.push_back({cells[0], cells[1], cells[2]});
  }
  if (!have_columns) throw ConfigError(fmt::format("{}: missing column header", path.string()));
  if (truth_lambda && truth_dpp) data.truth = GenerationTruth{*truth_lambda, *truth_dpp};
  data.validate();
  return data;
}

}  // namespace csl
