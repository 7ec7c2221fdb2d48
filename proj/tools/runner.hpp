#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "phlab/maps.hpp"

namespace phlab::cli {

const std::vector<std::string>& command_names();

struct ExperimentConfig {
  std::string command;
  MapSpec map;
  nlohmann::json parameters = nlohmann::json::object();  // every key present after parsing
  std::uint64_t seed = 0;
  std::string output_dir = "phlab-out";

  bool operator==(const ExperimentConfig&) const = default;
};

// Fills defaults for every missing field and rejects unknown parameter keys or wrong types
// with ConfigError. A missing map selects the command's default map.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct Table {
  std::string file;  // relative to the output directory
  std::string body;
};

struct ReportBundle {
  nlohmann::json report;  // {"config", "status", "result"}; status is "ok" or "numerical_error"
  std::vector<Table> tables;
  nlohmann::json metadata;
  int exit_code = 0;
};

// Runs the command pipeline. NumericalError is caught and turned into exit code 3 with
// whatever partial result the module returned; ConfigError propagates.
ReportBundle run(const ExperimentConfig& config);

// report.json holds the report with a "metadata" member added; tables go next to it.
void write_bundle(const ReportBundle& b, const std::string& dir);

struct Tolerance {
  double abs = 0.0;
  double rel = 0.0;
};

// Keys are dotted paths such as "result.center.value"; array indices may be written
// as [3] or as the wildcard [*]. Fields without an entry compare strictly.
using ToleranceTable = std::map<std::string, Tolerance>;
ToleranceTable tolerance_table_from_json(const nlohmann::json& j);

struct GoldenComparison {
  bool pass = true;
  std::vector<std::string> failures;  // "path: reason"
};

// Field-by-field comparison of everything but "metadata". Fields present on only one
// side are listed as missing.
GoldenComparison compare_golden(const nlohmann::json& report, const nlohmann::json& golden,
                                const ToleranceTable& tolerances);

}  // namespace phlab::cli
