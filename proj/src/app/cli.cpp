#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cfmm/app.hpp"
#include "cfmm/error.hpp"

namespace cfmm::app {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "--config: cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ConfigError, "--config: " + std::string(e.what()));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constant function market maker analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Scenario config (JSON)")->required();
    sub->add_option("--out", out_path, "Output file; defaults to the config's output or stdout");
    sub->add_option("--seed", seed, "Base seed; overrides the config");
    sub->add_option("--samples", samples, "Number of runs or sample points");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help, diag;
    const int code = app.exit(e, help, diag);
    out << help.str();
    err << diag.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunRequest request;
    request.command = app.get_subcommands().front()->get_name();
    request.config = parse_config(read_json_file(config_path));
    request.seed = seed;
    request.samples = samples;
    const RunOutput result = run_command(request);

    const std::string target = !out_path.empty() ? out_path : request.config.output.value_or("");
    if (target.empty()) {
      out << result.text;
    } else {
      std::ofstream file(target, std::ios::binary);
      if (!file) fail(ErrorKind::ConfigError, "--out: cannot write '" + target + "'");
      file << result.text;
    }
    if (result.exit_code == kExitViolation) err << request.command << ": a bound check failed\n";
    return result.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace cfmm::app
