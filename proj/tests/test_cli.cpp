#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfmm/app.hpp"
#include "cfmm/error.hpp"

namespace cfmm::app {
namespace {

namespace fs = std::filesystem;

std::string data_path(const std::string& name) { return std::string(CFMM_TEST_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load(const std::string& name) { return nlohmann::json::parse(slurp(data_path(name))); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

RunOutput run(const std::string& command, const nlohmann::json& doc) {
  return run_command(RunRequest{command, parse_config(doc), std::nullopt, std::nullopt});
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cfmm");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json product_pool(double r, double rp) {
  return {{"kind", "constant_product"}, {"params", nlohmann::json::object()}, {"reserve_traded", r},
          {"reserve_numeraire", rp},    {"fee_gamma", 1.0}};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

TEST(Config, RoundTripsCanonicalDocuments) {
  for (const std::string name : {"sim_walk.json", "sim_zero_shocks.json", "arb_worked_pair.json"}) {
    const nlohmann::json doc = load(name);
    EXPECT_EQ(to_json(parse_config(doc)), doc) << name;
  }
  nlohmann::json sweep = {{"version", 1},
                          {"pools", {{"cp", product_pool(1, 1)}}},
                          {"sweep", {{"pool", "cp"}, {"parameter", "reserves"}, {"from", 1.0}, {"to", 9.0},
                                     {"steps", 5}, {"scale", "linear"}}},
                          {"output", "out.csv"},
                          {"seed", 12}};
  EXPECT_EQ(to_json(parse_config(sweep)), sweep);
}

TEST(Config, ErrorsNameTheField) {
  const auto message = [](const nlohmann::json& doc) {
    try {
      parse_config(doc);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  nlohmann::json base = {{"version", 1}, {"pools", {{"cp", product_pool(1, 1)}}}};

  nlohmann::json empty = base;
  empty["sweep"] = {{"pool", "cp"}, {"parameter", "reserves"}, {"from", 1.0}, {"to", 2.0}, {"steps", 0}};
  EXPECT_NE(message(empty).find("sweep.steps"), std::string::npos);

  nlohmann::json undefined = base;
  undefined["sweep"] = {{"pool", "nope"}, {"parameter", "reserves"}, {"from", 1.0}, {"to", 2.0}, {"steps", 3}};
  EXPECT_NE(message(undefined).find("sweep.pool"), std::string::npos);

  nlohmann::json bad_pool = base;
  bad_pool["pools"]["cp"]["reserve_traded"] = -1.0;
  EXPECT_NE(message(bad_pool).find("pools.cp"), std::string::npos);

  nlohmann::json unknown = base;
  unknown["colour"] = "blue";
  EXPECT_NE(message(unknown).find("colour"), std::string::npos);

  EXPECT_NE(message({{"pools", nlohmann::json::object()}}).find("version"), std::string::npos);
  EXPECT_NE(message({{"version", 2}}).find("version"), std::string::npos);
}

TEST(Config, LogSweepHitsItsEndpoints) {
  SweepAxis axis{"p", "beta", 1e-6, 1e6, 25, "log"};
  const auto v = axis.values();
  ASSERT_EQ(v.size(), 25u);
  EXPECT_EQ(v.front(), 1e-6);
  EXPECT_EQ(v.back(), 1e6);
  EXPECT_NEAR(v[12], 1.0, 1e-12);
}

TEST(FormatNumber, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-1.5e-300), "-1.5000000000000001e-300");
  for (double v : {1.0 / 3.0, 12345.678901234567, 6.02214076e23}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Commands, ArbWorkedPair) {
  const RunOutput out = run("arb", load("arb_worked_pair.json"));
  EXPECT_EQ(out.exit_code, kExitOk);
  const auto rows = parse_csv(out.text);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(std::stod(rows[1][column(rows[0], "price_move")]), 0.050657, 1e-5);
  EXPECT_NEAR(std::stod(rows[1][column(rows[0], "bound")]), 1.0 / 9.0, 1e-5);
  EXPECT_EQ(rows[1][column(rows[0], "status")], "pass");
}

TEST(Commands, ArbMirrorsAnInvertedPair) {
  nlohmann::json doc = load("arb_worked_pair.json");
  doc["options"] = {{"external", "secondary"}, {"secondary", "external"}};
  const auto rows = parse_csv(run("arb", doc).text);
  EXPECT_EQ(rows[1][column(rows[0], "mirrored")], "1");
  EXPECT_EQ(rows[1][column(rows[0], "status")], "pass");
}

TEST(Commands, SimWithZeroShocksDoesNotTrade) {
  const auto rows = parse_csv(run("sim", load("sim_zero_shocks.json")).text);
  ASSERT_EQ(rows.size(), 6u);
  const std::size_t d = column(rows[0], "delta_star");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::stod(rows[i][d]), 0.0);
}

TEST(Commands, SimIsDeterministicAndMatchesGolden) {
  for (const std::string name : {"sim_walk", "sim_zero_shocks"}) {
    const nlohmann::json doc = load(name + ".json");
    const std::string a = run("sim", doc).text;
    const std::string b = run("sim", doc).text;
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, slurp(data_path("golden/" + name + ".csv"))) << name;
  }
}

TEST(Commands, SimNeedsASeed) {
  nlohmann::json doc = load("sim_walk.json");
  doc.erase("seed");
  EXPECT_EQ(kind_of([&] { run("sim", doc); }), ErrorKind::ConfigError);
  // A seed on the command line is enough.
  const RunOutput out = run_command(RunRequest{"sim", parse_config(doc), 20211015, std::nullopt});
  EXPECT_EQ(out.text, slurp(data_path("golden/sim_walk.csv")));
}

TEST(Commands, SimSeedsChangeTheOutput) {
  const nlohmann::json doc = load("sim_walk.json");
  const auto a = run_command(RunRequest{"sim", parse_config(doc), 1, std::nullopt}).text;
  const auto b = run_command(RunRequest{"sim", parse_config(doc), 2, std::nullopt}).text;
  EXPECT_NE(a, b);
  // --samples controls the number of runs.
  const auto c = run_command(RunRequest{"sim", parse_config(doc), 1, 2}).text;
  EXPECT_EQ(parse_csv(c).size(), 1u + 2u * 20u);
}

TEST(Commands, CurvatureBetaSweepReproducesTheLimits) {
  nlohmann::json doc = {{"version", 1},
                        {"pools", {{"stable", {{"kind", "curve"},
                                               {"params", {{"alpha", 1.0}, {"beta", 1.0}}},
                                               {"reserve_traded", 10.0},
                                               {"reserve_numeraire", 10.0}}}}},
                        {"sweep", {{"pool", "stable"}, {"parameter", "beta"}, {"from", 1e-6}, {"to", 1e6},
                                   {"steps", 13}, {"scale", "log"}}}};
  const auto rows = parse_csv(run("curvature", doc).text);
  ASSERT_EQ(rows.size(), 14u);
  const std::size_t mu = column(rows[0], "mu");
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double m = std::stod(rows[i][mu]);
    EXPECT_GT(m, prev);
    prev = m;
  }
  EXPECT_LT(std::stod(rows[1][mu]), 1e-6);
  EXPECT_NEAR(prev, 4.0 / 20.0, 1e-3 * 0.2);
}

TEST(Commands, CurvatureReserveSweepOnProduct) {
  nlohmann::json doc = {{"version", 1},
                        {"pools", {{"cp", product_pool(1, 1)}}},
                        {"sweep", {{"pool", "cp"}, {"parameter", "reserves"}, {"from", 1.0}, {"to", 100.0},
                                   {"steps", 10}}}};
  const auto rows = parse_csv(run("curvature", doc).text);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double r = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][column(rows[0], "mu")]), 4.0 / (2.0 * r), 1e-12 * r);
  }
}

TEST(Commands, CurvatureRejectsParametersOfOtherKinds) {
  nlohmann::json doc = {{"version", 1},
                        {"pools", {{"cp", product_pool(1, 1)}}},
                        {"sweep", {{"pool", "cp"}, {"parameter", "beta"}, {"from", 1.0}, {"to", 2.0}, {"steps", 2}}}};
  EXPECT_EQ(kind_of([&] { run("curvature", doc); }), ErrorKind::ConfigError);
  doc.erase("sweep");
  EXPECT_EQ(kind_of([&] { run("curvature", doc); }), ErrorKind::ConfigError);
}

TEST(Commands, GameModes) {
  nlohmann::json edge = {{"version", 1},
                         {"pools", {{"cp", product_pool(100, 100)}}},
                         {"options", {{"mode", "edge"}, {"pool", "cp"}, {"alpha", 0.6}, {"m1", 0.9}, {"interval_L", 20.0}}}};
  const RunOutput e = run("game", edge);
  EXPECT_EQ(e.exit_code, kExitOk);
  const auto j = nlohmann::json::parse(e.text);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_GE(j["optimum"]["value"].get<double>(), j["optimum"]["lower_bound"].get<double>() - 1e-9);

  nlohmann::json gda = edge;
  gda["options"] = {{"mode", "gda"}, {"pool", "cp"}, {"target_price", 1.2}};
  EXPECT_EQ(nlohmann::json::parse(run("game", gda).text)["status"], "pass");

  nlohmann::json multi = edge;
  multi["options"] = {{"mode", "multiperiod"}, {"pool", "cp"}, {"alphas", {0.7, 0.6}},
                      {"targets", {{0.95, 1.05}, {1.0, 0.9}}}, {"samples", 16}};
  EXPECT_EQ(kind_of([&] { run("game", multi); }), ErrorKind::ConfigError);
  multi["seed"] = 3;
  const auto m = nlohmann::json::parse(run("game", multi).text);
  EXPECT_EQ(m["rows"].size(), 2u);
  EXPECT_EQ(m["monte_carlo"]["samples"], 16);
  EXPECT_EQ(run("game", multi).text, run("game", multi).text);
}

TEST(Commands, SubsidyModes) {
  nlohmann::json pair = {{"version", 1},
                         {"pools", {{"ext", product_pool(100, 99.5)}, {"sec", product_pool(100, 100)}}},
                         {"options", {{"mode", "pair"}, {"external", "ext"}, {"secondary", "sec"}}}};
  const RunOutput p = run("subsidy", pair);
  EXPECT_EQ(p.exit_code, kExitOk);
  const auto rows = parse_csv(p.text);
  EXPECT_EQ(rows[1][column(rows[0], "status")], "pass");

  nlohmann::json balancer = {
      {"version", 1},
      {"pools", {{"a", {{"kind", "geometric_mean"}, {"params", {{"tau", 0.8}}}, {"reserve_traded", 80.0},
                        {"reserve_numeraire", 20.0}}},
                 {"b", {{"kind", "geometric_mean"}, {"params", {{"tau", 0.5}}}, {"reserve_traded", 50.0},
                        {"reserve_numeraire", 50.0}}}}},
      {"options", {{"mode", "balancer"}, {"pool1", "a"}, {"pool2", "b"}, {"trades", {1.0}}}}};
  const auto b = parse_csv(run("subsidy", balancer).text);
  EXPECT_DOUBLE_EQ(std::stod(b[1][column(b[0], "excess_loss")]), 49.0 / 0.5 - 79.0 / 0.8);

  balancer["pools"]["b"]["reserve_numeraire"] = 60.0;
  EXPECT_EQ(kind_of([&] { run("subsidy", balancer); }), ErrorKind::SpotPriceMismatch);
}

TEST(Commands, GreeksModes) {
  nlohmann::json prices = {{"version", 1},
                           {"pools", {{"cp", product_pool(100, 100)}}},
                           {"options", {{"mode", "prices"}, {"pool", "cp"}, {"prices", {1.0, 4.0}}}}};
  const auto rows = parse_csv(run("greeks", prices).text);
  EXPECT_DOUBLE_EQ(std::stod(rows[1][column(rows[0], "p_delta")]), 100.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[2][column(rows[0], "p_gamma")]), -0.5 * 100.0 / 8.0);

  nlohmann::json rep = {{"version", 1},
                        {"options", {{"mode", "replication"}, {"cutoff", 1.0}, {"k_max", 3.0}, {"intervals", 4}}}};
  const auto r = parse_csv(run("greeks", rep).text);
  ASSERT_EQ(r.size(), 6u);
  EXPECT_DOUBLE_EQ(std::stod(r[5][1]), 2.0 / 27.0);

  nlohmann::json hedge = {{"version", 1},
                          {"pools", {{"cp", product_pool(100, 100)}}},
                          {"options", {{"mode", "hedge"}, {"pool", "cp"}, {"interval_L", 10.0}, {"mu", 0.02},
                                       {"kappa", 2.0 * 100.0 * 100.0 / (110.0 * 110.0 * 110.0)}, {"samples", 10}}}};
  const RunOutput h = run("greeks", hedge);
  EXPECT_EQ(parse_csv(h.text).size(), 12u);
  EXPECT_EQ(h.exit_code, kExitOk);
}

TEST(Commands, ConfigMustMatchTheCommand) {
  EXPECT_EQ(kind_of([&] { run("sim", load("arb_worked_pair.json")); }), ErrorKind::ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fs::temp_directory_path() / "cfmm_cli_test";
  fs::create_directories(dir);
  const auto write = [&](const std::string& name, const nlohmann::json& doc) {
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump();
    return p.string();
  };

  const CliResult ok = cli({"arb", "--config", data_path("arb_worked_pair.json")});
  EXPECT_EQ(ok.code, kExitOk);
  EXPECT_EQ(ok.out, run("arb", load("arb_worked_pair.json")).text);

  nlohmann::json empty = {{"version", 1},
                          {"pools", {{"cp", product_pool(1, 1)}}},
                          {"sweep", {{"pool", "cp"}, {"parameter", "reserves"}, {"from", 1.0}, {"to", 2.0}, {"steps", 0}}}};
  const CliResult bad = cli({"curvature", "--config", write("empty.json", empty)});
  EXPECT_EQ(bad.code, kExitConfig);
  EXPECT_NE(bad.err.find("sweep.steps"), std::string::npos);

  EXPECT_EQ(cli({"curvature", "--config", (dir / "missing.json").string()}).code, kExitConfig);
  EXPECT_EQ(cli({"curvature"}).code, kExitConfig);
  EXPECT_EQ(cli({"frobnicate", "--config", "x"}).code, kExitConfig);

  // A kappa above the slope on the interval breaks the hedge bracket.
  nlohmann::json hedge = {{"version", 1},
                          {"pools", {{"cp", product_pool(100, 100)}}},
                          {"options", {{"mode", "hedge"}, {"pool", "cp"}, {"interval_L", 10.0}, {"mu", 0.02},
                                       {"kappa", 0.02}, {"samples", 4}}}};
  EXPECT_EQ(cli({"greeks", "--config", write("hedge.json", hedge)}).code, kExitViolation);

  const std::string out = (dir / "walk.csv").string();
  const CliResult to_file = cli({"sim", "--config", data_path("sim_walk.json"), "--out", out});
  EXPECT_EQ(to_file.code, kExitOk);
  EXPECT_TRUE(to_file.out.empty());
  EXPECT_EQ(slurp(out), slurp(data_path("golden/sim_walk.csv")));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace cfmm::app
