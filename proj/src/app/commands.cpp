#include <cmath>
#include <functional>
#include <sstream>

#include "cfmm/app.hpp"
#include "cfmm/arbitrage.hpp"
#include "cfmm/curvature.hpp"
#include "cfmm/error.hpp"
#include "cfmm/games.hpp"
#include "cfmm/greeks.hpp"
#include "cfmm/incentives.hpp"
#include "cfmm/kernels.hpp"

namespace cfmm::app {

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::ConfigError, path + ": " + what);
}

// Typed access to the options object with field paths in every message.
class Options {
 public:
  explicit Options(const nlohmann::json& j) : j_(j) {}

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key) const {
    require_key(key);
    if (!j_.at(key).is_number()) config_error(path(key), "must be a number");
    const double v = j_.at(key).get<double>();
    if (!std::isfinite(v)) config_error(path(key), "must be finite");
    return v;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number_integer()) config_error(path(key), "must be an integer");
    return j_.at(key).get<int>();
  }

  std::string text(const std::string& key) const {
    require_key(key);
    if (!j_.at(key).is_string()) config_error(path(key), "must be a string");
    return j_.at(key).get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    require_key(key);
    const auto& a = j_.at(key);
    if (!a.is_array()) config_error(path(key), "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) config_error(path(key) + "[" + std::to_string(i) + "]", "must be a number");
      out.push_back(a[i].get<double>());
    }
    return out;
  }

  const nlohmann::json& raw(const std::string& key) const {
    require_key(key);
    return j_.at(key);
  }

  static std::string path(const std::string& key) { return "options." + key; }

 private:
  void require_key(const std::string& key) const {
    if (!has(key)) config_error(path(key), "missing");
  }
  const nlohmann::json& j_;
};

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) fail(ErrorKind::InvalidArgument, "CSV row width mismatch");
    line(cells);
  }
  std::string str() const { return out_.str(); }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::size_t width_;
  std::ostringstream out_;
};

std::string num(double v) { return format_number(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

std::uint64_t require_seed(const RunRequest& r, const std::string& command) {
  if (r.seed) return *r.seed;
  if (r.config.seed) return *r.config.seed;
  config_error("seed", command + " needs a seed (config field or --seed)");
}

int samples_of(const RunRequest& r, const Options& o, int fallback) {
  const int n = r.samples ? *r.samples : o.integer("samples", fallback);
  if (n < 1) config_error(Options::path("samples"), "must be at least 1");
  return n;
}

PoolState with_parameter(const PoolState& pool, const std::string& parameter, double v) {
  const auto bad = [&](const std::string& why) -> PoolState { config_error("sweep.parameter", why); };
  if (parameter == "beta" || parameter == "alpha") {
    const auto* c = std::get_if<Curve>(&pool.kind());
    if (!c) return bad(parameter + " applies to Curve pools");
    return pool.with_kind(parameter == "beta" ? Curve{c->alpha, v} : Curve{v, c->beta});
  }
  if (parameter == "tau") {
    if (!std::holds_alternative<GeometricMean>(pool.kind())) return bad("tau applies to GeometricMean pools");
    return pool.with_kind(GeometricMean{v});
  }
  if (parameter == "reserves") {
    const double s = v / pool.reserve_traded();
    return pool.with_reserves(v, pool.reserve_numeraire() * s);
  }
  if (parameter == "reserve_traded") return pool.with_reserves(v, pool.reserve_numeraire());
  if (parameter == "reserve_numeraire") return pool.with_reserves(pool.reserve_traded(), v);
  if (parameter == "fee_gamma") return pool.with_fee(v);
  return bad("unknown parameter '" + parameter + "'");
}

const SweepAxis& require_sweep(const ScenarioConfig& c, const std::string& command) {
  if (!c.sweep) config_error("sweep", command + " needs a sweep");
  return *c.sweep;
}

// ---------------------------------------------------------------------------

RunOutput cmd_curvature(const RunRequest& r) {
  const Options o(r.config.options);
  const SweepAxis& axis = require_sweep(r.config, "curvature");
  const PoolState& base = r.config.pool(axis.pool, "sweep.pool");
  const std::vector<double> values = axis.values();
  std::vector<PoolState> pools;
  pools.reserve(values.size());
  for (double v : values) {
    try {
      pools.push_back(with_parameter(base, axis.parameter, v));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      config_error("sweep", "value " + num(v) + ": " + e.what());
    }
  }
  const double kappa_frac = o.number("kappa_frac", 0.5);
  const auto points = curvature_sweep(pools, kappa_frac, Execution::Parallel);

  Csv csv({"parameter", "mu", "kappa", "mu_interval", "kappa_interval", "status"});
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CurvaturePoint& p = points[i];
    csv.row({num(values[i]), num(p.mu.mu), num(p.kappa), num(p.mu.interval_L), num(p.kappa_interval),
             p.error ? std::string(to_string(*p.error)) : "ok"});
  }
  return {csv.str(), kExitOk};
}

struct NamedPair {
  std::string external;
  std::string secondary;
};

std::vector<NamedPair> pairs_of(const Options& o) {
  std::vector<NamedPair> out;
  if (o.has("pairs")) {
    const auto& a = o.raw("pairs");
    if (!a.is_array() || a.empty()) config_error(Options::path("pairs"), "must be a nonempty array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = Options::path("pairs") + "[" + std::to_string(i) + "]";
      if (!a[i].is_object() || !a[i].contains("external") || !a[i].contains("secondary") ||
          !a[i]["external"].is_string() || !a[i]["secondary"].is_string()) {
        config_error(p, "needs string fields external and secondary");
      }
      out.push_back({a[i]["external"].get<std::string>(), a[i]["secondary"].get<std::string>()});
    }
  } else {
    out.push_back({o.text("external"), o.text("secondary")});
  }
  return out;
}

RunOutput cmd_arb(const RunRequest& r) {
  const Options o(r.config.options);
  const std::vector<NamedPair> names = pairs_of(o);
  std::vector<MarketPair> pairs;
  std::vector<bool> mirrored;
  for (const NamedPair& n : names) {
    const PoolState& ext = r.config.pool(n.external, Options::path("external"));
    const PoolState& sec = r.config.pool(n.secondary, Options::path("secondary"));
    mirrored.push_back(spot_price(ext) > spot_price(sec));
    pairs.push_back(normalize_orientation(PriceImpactFn::from_pool(ext), PriceImpactFn::from_pool(sec)));
  }
  const auto outcomes = resolve_pairs(pairs, Execution::Parallel);

  Csv csv({"external", "secondary", "mirrored", "m0_e", "m0_s", "delta_star", "m_a", "price_move", "bound", "mu",
           "kappa", "interval_L", "interval_condition", "status"});
  int exit = kExitOk;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PairOutcome& p = outcomes[i];
    const bool condition = p.cert.kappa > 0.0 && check_interval_condition(p.cert.mu, p.cert.kappa, p.cert.interval_L,
                                                                           pairs[i].m0_s, pairs[i].m0_e);
    if (!p.bound_holds) exit = kExitViolation;
    csv.row({names[i].external, names[i].secondary, flag(mirrored[i]), num(pairs[i].m0_e), num(pairs[i].m0_s),
             num(p.result.delta_star), num(p.result.m_a), num(p.result.price_move), num(p.result.bound),
             num(p.cert.mu), num(p.cert.kappa), num(p.cert.interval_L), flag(condition),
             p.bound_holds ? "pass" : "fail"});
  }
  return {csv.str(), exit};
}

RunOutput cmd_sim(const RunRequest& r) {
  const Options o(r.config.options);
  const std::uint64_t seed = require_seed(r, "sim");
  const PoolState& ext = r.config.pool(o.text("external"), Options::path("external"));
  const PoolState& sec = r.config.pool(o.text("secondary"), Options::path("secondary"));

  std::vector<std::vector<TrajectoryRow>> runs;
  if (o.has("log_returns")) {
    const std::vector<double> series = o.numbers("log_returns");
    const int rounds = o.integer("rounds", static_cast<int>(series.size()));
    runs.push_back(simulate_rounds(ext, sec, PriceProcess::series(series), rounds));
  } else {
    const int rounds = o.integer("rounds", 0);
    if (rounds < 1) config_error(Options::path("rounds"), "must be at least 1");
    const double sigma = o.number("sigma");
    if (sigma < 0.0) config_error(Options::path("sigma"), "must be nonnegative");
    const auto seeds = derive_seeds(seed, static_cast<std::size_t>(samples_of(r, o, 1)));
    runs = simulate_batch(ext, sec, sigma, rounds, seeds, Execution::Parallel);
  }

  Csv csv({"run", "round", "m0_e", "m0_s", "m_a", "delta_star", "bound", "pv_lp", "status"});
  int exit = kExitOk;
  for (std::size_t run = 0; run < runs.size(); ++run) {
    for (const TrajectoryRow& row : runs[run]) {
      const bool ok = std::abs(row.m_a - row.m0_s) <= row.bound + 1e-9;
      if (!ok) exit = kExitViolation;
      csv.row({std::to_string(run), std::to_string(row.round), num(row.m0_e), num(row.m0_s), num(row.m_a),
               num(row.delta_star), num(row.bound), num(row.pv_lp), ok ? "pass" : "fail"});
    }
  }
  return {csv.str(), exit};
}

GdaConfig gda_config(const Options& o) {
  GdaConfig c;
  c.eta_alpha = o.number("eta_alpha", c.eta_alpha);
  c.eta_beta = o.number("eta_beta", c.eta_beta);
  c.max_steps = o.integer("max_steps", c.max_steps);
  c.tolerance = o.number("tolerance", c.tolerance);
  c.target_price = o.number("target_price", c.target_price);
  return c;
}

RunOutput cmd_game(const RunRequest& r) {
  const Options o(r.config.options);
  const std::string mode = o.text("mode", "edge");
  const PoolState& pool = r.config.pool(o.text("pool"), Options::path("pool"));
  nlohmann::json out{{"mode", mode}};
  int exit = kExitOk;

  if (mode == "edge") {
    const PriceImpactFn g = PriceImpactFn::from_pool(pool);
    GameSpec spec;
    spec.gamma = o.number("gamma", pool.fee_gamma());
    spec.alpha = o.number("alpha");
    spec.m0 = spec.gamma * g(0.0);
    spec.m1 = o.number("m1");
    spec.interval_L = o.number("interval_L");
    spec.validate();
    const CurvatureBounds sell = certify_bounds(g, spec.interval_L, Side::Sell);
    const double kappa = o.number("kappa", sell.kappa);
    const EdgeOptimum opt = o.has("mu") ? informed_edge_opt(spec, g, o.number("mu")) : informed_edge_opt(spec, g);
    const LossBound loss = lp_loss_bound(spec, kappa, spec.interval_L);
    const bool within = opt.delta_opt <= spec.interval_L;
    const double lp_at = lp_expected_payoff(spec, g, std::min(opt.delta_opt, spec.interval_L));
    const bool ok = opt.value >= opt.lower_bound - 1e-9 && lp_at >= loss.value - 1e-9;
    if (!ok) exit = kExitViolation;
    out["optimum"] = opt;
    out["loss_bound"] = loss;
    out["kappa"] = kappa;
    out["optimum_within_interval"] = within;
    out["lp_payoff_on_interval"] = lp_at;
    out["status"] = ok ? "pass" : "fail";
  } else if (mode == "gda") {
    try {
      const GdaResult res = gda_trade_solver(pool, gda_config(o));
      out["result"] = res;
      out["status"] = res.converged ? "pass" : "fail";
      if (!res.converged) exit = kExitViolation;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Diverged) throw;
      out["status"] = "diverged";
      out["message"] = e.what();
      exit = kExitViolation;
    }
  } else if (mode == "multiperiod") {
    const std::uint64_t seed = require_seed(r, "game multiperiod");
    const std::vector<double> alphas = o.numbers("alphas");
    const auto& t = o.raw("targets");
    if (!t.is_array()) config_error(Options::path("targets"), "must be an array of [predicted, alternative]");
    std::vector<TargetPair> targets;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_array() || t[i].size() != 2 || !t[i][0].is_number() || !t[i][1].is_number()) {
        config_error(Options::path("targets") + "[" + std::to_string(i) + "]", "must be [predicted, alternative]");
      }
      targets.push_back({t[i][0].get<double>(), t[i][1].get<double>()});
    }
    if (alphas.empty()) config_error(Options::path("alphas"), "needs at least one round");
    const GdaConfig config = gda_config(o);
    const auto rows = multiperiod_sim(pool, alphas, targets, config, seed);
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& row : rows) {
      jr.push_back({{"t", row.t}, {"alpha", row.alpha}, {"R", row.R}, {"R_prime", row.R_prime},
                    {"R_expected", row.R_expected}, {"R_prime_expected", row.R_prime_expected}});
    }
    out["rows"] = jr;
    const int samples = samples_of(r, o, 1);
    const auto finals = multiperiod_batch(pool, alphas, targets, config, derive_seeds(seed, samples),
                                          Execution::Parallel);
    double mean = 0.0, sq = 0.0;
    for (const auto& f : finals) mean += f.R;
    mean /= samples;
    for (const auto& f : finals) sq += (f.R - mean) * (f.R - mean);
    const double se = samples > 1 ? std::sqrt(sq / (samples - 1) / samples) : 0.0;
    out["monte_carlo"] = {{"samples", samples},
                          {"mean_R", mean},
                          {"standard_error", se},
                          {"expected_R", rows.back().R_expected}};
    out["status"] = "pass";
  } else {
    config_error(Options::path("mode"), "must be edge, gda or multiperiod");
  }
  return {out.dump(2) + "\n", exit};
}

RunOutput cmd_subsidy(const RunRequest& r) {
  const Options o(r.config.options);
  const std::string mode = o.text("mode", "pair");
  if (mode == "pair") {
    const PoolState& ext = r.config.pool(o.text("external"), Options::path("external"));
    const PoolState& sec = r.config.pool(o.text("secondary"), Options::path("secondary"));
    if (spot_price(ext) > spot_price(sec)) config_error(Options::path("external"), "must quote the lower price");
    const MarketPair pair = make_pair(PriceImpactFn::from_pool(ext), PriceImpactFn::from_pool(sec));
    const CurvatureBounds cert = certify_pair(pair);
    const SubsidyResult sub = sufficient_subsidy(cert.mu, cert.kappa, pair.m0_s, pair.m0_e);
    const SubsidyReport rep = verify_subsidy(pair, sub);
    Csv csv({"m0_e", "m0_s", "delta_star", "m_a", "realized_cost", "subsidy_numeraire", "subsidy_traded", "growth_h",
             "ratio_mu_kappa", "slack", "unit_trade", "status"});
    csv.row({num(pair.m0_e), num(pair.m0_s), num(rep.delta_star), num(rep.m_a), num(rep.realized_cost),
             num(sub.subsidy_numeraire), num(sub.subsidy_traded), num(sub.growth_h), num(sub.ratio_mu_kappa),
             num(rep.slack), flag(rep.unit_trade), rep.pass ? "pass" : "fail"});
    return {csv.str(), rep.pass ? kExitOk : kExitViolation};
  }
  if (mode == "balancer") {
    const PoolState& p1 = r.config.pool(o.text("pool1"), Options::path("pool1"));
    const PoolState& p2 = r.config.pool(o.text("pool2"), Options::path("pool2"));
    const auto steps = cumulative_subsidy(p1, p2, o.numbers("trades"));
    Csv csv({"t", "delta", "excess_loss", "cumulative"});
    for (const SubsidyStep& s : steps) csv.row({std::to_string(s.t), num(s.delta), num(s.excess_loss), num(s.cumulative)});
    return {csv.str(), kExitOk};
  }
  config_error(Options::path("mode"), "must be pair or balancer");
}

RunOutput cmd_greeks(const RunRequest& r) {
  const Options o(r.config.options);
  const std::string mode = o.text("mode", "prices");
  if (mode == "prices") {
    std::vector<double> prices;
    std::string pool_name;
    if (o.has("prices")) {
      prices = o.numbers("prices");
      pool_name = o.text("pool");
    } else {
      const SweepAxis& axis = require_sweep(r.config, "greeks");
      if (axis.parameter != "price") config_error("sweep.parameter", "greeks sweeps over price");
      prices = axis.values();
      pool_name = axis.pool;
    }
    if (prices.empty()) config_error(Options::path("prices"), "needs at least one price");
    const PoolState& pool = r.config.pool(pool_name, Options::path("pool"));
    const auto reports = greeks_sweep(pool, prices, Execution::Parallel);
    Csv csv({"price", "p_v", "p_delta", "p_gamma", "reserve_traded", "reserve_numeraire"});
    for (const GreeksReport& g : reports) {
      csv.row({num(g.price), num(g.p_v), num(g.p_delta), num(g.p_gamma), num(g.reserve_traded),
               num(g.reserve_numeraire)});
    }
    return {csv.str(), kExitOk};
  }
  if (mode == "replication") {
    const double cutoff = o.number("cutoff");
    const double epsilon = o.number("epsilon", 0.0);
    const double k_max = o.number("k_max");
    const int intervals = o.integer("intervals", 64);
    if (intervals < 1) config_error(Options::path("intervals"), "must be at least 1");
    const ReplicationPortfolio p =
        carr_madan_weights(cutoff, epsilon, uniform_strikes(cutoff + epsilon, k_max, static_cast<std::size_t>(intervals)));
    Csv csv({"strike", "weight"});
    for (std::size_t i = 0; i < p.strikes.size(); ++i) csv.row({num(p.strikes[i]), num(p.weights[i])});
    return {csv.str(), kExitOk};
  }
  if (mode == "hedge") {
    const PoolState& pool = r.config.pool(o.text("pool"), Options::path("pool"));
    const double L = o.number("interval_L");
    const int samples = samples_of(r, o, 100);
    const double mu = o.number("mu");
    const double kappa = o.number("kappa");
    Csv csv({"delta", "lower", "exact", "upper", "holds"});
    int exit = kExitOk;
    for (int i = 0; i <= samples; ++i) {
      const double d = L * i / samples;
      const HedgeBounds h = hedge_bounds(pool, d, mu, kappa);
      if (!h.holds) exit = kExitViolation;
      csv.row({num(d), num(h.lower), num(h.exact), num(h.upper), flag(h.holds)});
    }
    return {csv.str(), exit};
  }
  config_error(Options::path("mode"), "must be prices, replication or hedge");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"curvature", "arb", "sim", "game", "subsidy", "greeks"};
  return names;
}

RunOutput run_command(const RunRequest& request) {
  if (request.config.command && *request.config.command != request.command) {
    config_error("command", "config is for '" + *request.config.command + "', not '" + request.command + "'");
  }
  static const std::map<std::string, std::function<RunOutput(const RunRequest&)>> table{
      {"curvature", cmd_curvature}, {"arb", cmd_arb},         {"sim", cmd_sim},
      {"game", cmd_game},           {"subsidy", cmd_subsidy}, {"greeks", cmd_greeks}};
  const auto it = table.find(request.command);
  if (it == table.end()) config_error("command", "unknown command '" + request.command + "'");
  return it->second(request);
}

}  // namespace cfmm::app
