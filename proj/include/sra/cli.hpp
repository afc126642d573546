#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sra::cli {

/// Fully resolved run description. Every run echoes this (defaults filled in)
/// under the "config" key of its output document, and feeding that document
/// back through --config reproduces the run bit-exactly.
struct RunConfig {
  std::string command;
  std::string model_name;
  nlohmann::json model_config = nlohmann::json::object();
  std::string format = "json";  // json | csv
  std::string out;              // empty -> stdout
  bool precise = false;
  std::uint64_t seed = 20250809;
  std::uint64_t reps = 10000;
  std::optional<double> psi0;
  int workers = 0;  // 0 -> hardware default
  int table_which = 1;
  std::string pivot_kind;           // empty -> all kinds
  std::string quantity = "ER";
  std::vector<int> n_grid;
  std::string provider = "analytic";  // analytic | mc
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

struct RunOutput {
  nlohmann::json doc;   // always populated; includes the config echo
  std::string csv;      // populated when format == "csv"
};

/// Executes one command. Throws ConfigError / NumericError / ValidationError;
/// the caller maps these to exit codes 2 / 3 / 4.
RunOutput run_command(const RunConfig& cfg);

/// Renders output to stdout and/or --out according to cfg; returns 0.
int emit_output(const RunConfig& cfg, const RunOutput& out);

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;
constexpr int kExitValidationError = 4;

}  // namespace sra::cli
