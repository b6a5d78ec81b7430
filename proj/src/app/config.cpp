#include <algorithm>
#include <charconv>
#include <cmath>

#include "cfmm/app.hpp"
#include "cfmm/error.hpp"

namespace cfmm::app {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::ConfigError, path + ": " + what);
}

double number_at(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) config_error(path + "." + key, "missing");
  if (!j.at(key).is_number()) config_error(path + "." + key, "must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) config_error(path + "." + key, "must be finite");
  return v;
}

std::string string_at(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) config_error(path + "." + key, "missing");
  if (!j.at(key).is_string()) config_error(path + "." + key, "must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

std::vector<double> SweepAxis::values() const {
  std::vector<double> v(static_cast<std::size_t>(steps));
  const bool log = scale.value_or("linear") == "log";
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    v[static_cast<std::size_t>(i)] =
        log ? std::exp(std::log(from) + t * (std::log(to) - std::log(from))) : from + t * (to - from);
  }
  if (!v.empty()) v.front() = from;
  if (steps > 1) v.back() = to;
  return v;
}

const PoolState& ScenarioConfig::pool(const std::string& name, const std::string& path) const {
  const auto it = pools.find(name);
  if (it == pools.end()) config_error(path, "pool '" + name + "' is not defined");
  return it->second;
}

ScenarioConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) config_error("$", "config must be a JSON object");
  ScenarioConfig c;
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
    config_error("version", "an integer version field is required");
  }
  c.version = doc.at("version").get<int>();
  if (c.version != 1) config_error("version", "unsupported version " + std::to_string(c.version));

  static const char* known[] = {"version", "command", "pools", "sweep", "options", "output", "seed"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) config_error(key, "unknown field");
  }

  if (doc.contains("command")) c.command = string_at(doc, "command", "$");
  if (doc.contains("output")) c.output = string_at(doc, "output", "$");
  if (doc.contains("seed")) {
    const auto& seed = doc.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      config_error("seed", "must be a nonnegative integer");
    }
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("pools")) {
    const auto& pools = doc.at("pools");
    if (!pools.is_object()) config_error("pools", "must be an object of named pools");
    for (const auto& [name, spec] : pools.items()) {
      try {
        c.pools.emplace(name, pool_from_json(spec));
      } catch (const Error& e) {
        config_error("pools." + name, e.what());
      }
    }
  }
  if (doc.contains("options")) {
    if (!doc.at("options").is_object()) config_error("options", "must be an object");
    c.options = doc.at("options");
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    if (!s.is_object()) config_error("sweep", "must be an object");
    SweepAxis axis;
    axis.pool = string_at(s, "pool", "sweep");
    axis.parameter = string_at(s, "parameter", "sweep");
    axis.from = number_at(s, "from", "sweep");
    axis.to = number_at(s, "to", "sweep");
    if (!s.contains("steps") || !s.at("steps").is_number_integer()) config_error("sweep.steps", "must be an integer");
    axis.steps = s.at("steps").get<int>();
    if (axis.steps < 1) config_error("sweep.steps", "the sweep is empty");
    if (s.contains("scale")) {
      axis.scale = string_at(s, "scale", "sweep");
      if (*axis.scale != "linear" && *axis.scale != "log") config_error("sweep.scale", "must be linear or log");
    }
    if (axis.scale.value_or("linear") == "log" && (axis.from <= 0.0 || axis.to <= 0.0)) {
      config_error("sweep", "a log sweep needs positive endpoints");
    }
    if (!c.pools.count(axis.pool)) config_error("sweep.pool", "pool '" + axis.pool + "' is not defined");
    c.sweep = axis;
  }
  return c;
}

nlohmann::json to_json(const ScenarioConfig& config) {
  nlohmann::json j;
  j["version"] = config.version;
  if (config.command) j["command"] = *config.command;
  if (!config.pools.empty()) {
    nlohmann::json pools = nlohmann::json::object();
    for (const auto& [name, pool] : config.pools) pools[name] = pool;
    j["pools"] = pools;
  }
  if (config.sweep) {
    const SweepAxis& s = *config.sweep;
    j["sweep"] = {{"pool", s.pool}, {"parameter", s.parameter}, {"from", s.from}, {"to", s.to}, {"steps", s.steps}};
    if (s.scale) j["sweep"]["scale"] = *s.scale;
  }
  if (!config.options.empty()) j["options"] = config.options;
  if (config.output) j["output"] = *config.output;
  if (config.seed) j["seed"] = *config.seed;
  return j;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace cfmm::app
