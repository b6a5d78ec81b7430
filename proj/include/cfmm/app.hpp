#pragma once

// Command-line front end without the argument parser: scenario configs,
// the six subcommands and their CSV / JSON renderings.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfmm/pool.hpp"
#include "json.hpp"

namespace cfmm::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

struct SweepAxis {
  std::string pool;
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  std::optional<std::string> scale;  // "linear" (default) or "log"

  std::vector<double> values() const;
};

struct ScenarioConfig {
  int version = 1;
  std::optional<std::string> command;
  std::map<std::string, PoolState> pools;
  std::optional<SweepAxis> sweep;
  nlohmann::json options = nlohmann::json::object();
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;

  const PoolState& pool(const std::string& name, const std::string& path) const;
};

// Raises ConfigError naming the offending field.
ScenarioConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);

struct RunRequest {
  std::string command;
  ScenarioConfig config;
  std::optional<std::uint64_t> seed;  // overrides config.seed
  std::optional<int> samples;         // overrides options.samples
};

struct RunOutput {
  std::string text;
  int exit_code = kExitOk;
};

// Library errors propagate as cfmm::Error; run_cli maps them onto exit 2.
RunOutput run_command(const RunRequest& request);

const std::vector<std::string>& command_names();

// Parses argv (program name first), runs the subcommand and writes the result
// to --out, the config's output path or `out`. Diagnostics go to `err`.
// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest round-trip formatting with 17 significant digits, '.' separator.
std::string format_number(double v);

}  // namespace cfmm::app
