#include "cfmm/games.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "cfmm/arbitrage.hpp"
#include "cfmm/curvature.hpp"
#include "cfmm/error.hpp"
#include "cfmm/numerics.hpp"

namespace cfmm {

using numerics::kInf;

void GameSpec::validate() const {
  require(alpha >= 0.5 && alpha < 1.0, ErrorKind::InvalidArgument, "alpha must lie in [1/2, 1)");
  require(std::isfinite(m0) && m0 > 0.0 && std::isfinite(m1) && m1 > 0.0, ErrorKind::InvalidArgument,
          "prices must be positive");
  require(m1 <= m0, ErrorKind::InvalidArgument, "m1 must not exceed m0");
  require(gamma > 0.0 && gamma <= 1.0, ErrorKind::InvalidArgument, "fee gamma must lie in (0, 1]");
  require(interval_L > 0.0, ErrorKind::InvalidArgument, "interval L must be positive");
}

double max_profitable_trade(const PoolState& pool, double m_a) {
  require(std::isfinite(m_a) && m_a > 0.0, ErrorKind::InvalidArgument, "price must be positive");
  const double mu = mu_estimate(pool).mu;
  if (mu == 0.0) return kInf;
  return (1.0 - pool.fee_gamma()) * m_a / mu;
}

OpportunityCost impermanent_loss_lb(const PoolState& pool, double delta) {
  require(delta >= 0.0, ErrorKind::InvalidArgument, "trade size must be nonnegative");
  if (delta == 0.0) return {};
  const PoolState feeless = pool.with_fee(1.0);
  // Selling delta moves the numeraire reserve by trade_output(-delta) < 0.
  const double received = -trade_output(feeless, -delta);
  OpportunityCost out;
  out.exact = marginal_price(feeless, -delta) * delta - received;
  out.bound = -mu_estimate(feeless).mu * delta * delta;
  return out;
}

double informed_edge(const GameSpec& spec, const PriceImpactFn& g, double delta) {
  require(delta >= 0.0, ErrorKind::InvalidArgument, "trade size must be nonnegative");
  require(-spec.gamma * delta >= g.delta_min(), ErrorKind::DomainExceeded,
          "fee-adjusted trade lies outside the price impact domain");
  const double gamma = spec.gamma;
  const double received =
      numerics::adaptive_simpson([&](double t) { return gamma * g(-gamma * t); }, 0.0, delta, 1e-10);
  return received - spec.expected_price() * delta;
}

double lp_expected_payoff(const GameSpec& spec, const PriceImpactFn& g, double delta) {
  return -informed_edge(spec, g, delta);
}

namespace {

double default_mu(const PriceImpactFn& g) {
  if (g.pool()) return mu_estimate(*g.pool()).mu;
  return mu_numeric(g);
}

}  // namespace

EdgeOptimum informed_edge_opt(const GameSpec& spec, const PriceImpactFn& g, std::optional<double> mu) {
  spec.validate();
  const double g0 = g(0.0);
  require(std::abs(spec.m0 - spec.gamma * g0) <= 1e-9 * spec.m0, ErrorKind::InvalidArgument,
          "the game starts at m0 = gamma g(0)");
  EdgeOptimum out;
  out.mu = mu ? *mu : default_mu(g);
  require(out.mu > 0.0, ErrorKind::MuZero, "the edge lower bound needs mu > 0");
  const double gamma = spec.gamma;
  out.lower_bound = spec.edge() * spec.edge() / (2.0 * out.mu * gamma * gamma);
  if (spec.edge() == 0.0) return out;

  // E_V is concave: its slope gamma g(-gamma t) - m_bar falls as t grows.
  const double m_bar = spec.expected_price();
  const double dmax = -g.delta_min() / gamma;
  auto slope = [&](double t) { return gamma * g(-gamma * t) - m_bar; };
  double hi = std::min(dmax, 1e-3 * g.scale());
  while (slope(hi) > 0.0 && hi < dmax) hi = std::min(dmax, 2.0 * hi);

  // Coarse grid with incremental quadrature, then golden section around the
  // best node.
  constexpr int kGrid = 256;
  std::array<double, kGrid + 1> value{};
  auto integrand = [&](double t) { return gamma * g(-gamma * t); };
  int best = 0;
  for (int i = 1; i <= kGrid; ++i) {
    const double a = hi * (i - 1) / kGrid;
    const double b = hi * i / kGrid;
    value[i] = value[i - 1] + numerics::adaptive_simpson(integrand, a, b, 1e-12) - m_bar * (b - a);
    if (value[i] > value[best]) best = i;
  }
  const double lo_bracket = hi * std::max(0, best - 1) / kGrid;
  const double hi_bracket = hi * std::min(kGrid, best + 1) / kGrid;
  const numerics::Extremum ext = numerics::golden_section_max(
      [&](double t) { return informed_edge(spec, g, t); }, lo_bracket, hi_bracket, 1e-13);
  out.delta_opt = ext.x;
  out.value = ext.value;
  if (value[best] > out.value) {
    out.delta_opt = hi * best / kGrid;
    out.value = informed_edge(spec, g, out.delta_opt);
  }
  return out;
}

LossBound lp_loss_bound(const GameSpec& spec, double kappa, double L) {
  require(kappa > 0.0, ErrorKind::KappaZero, "the LP loss bound needs kappa > 0");
  require(L > 0.0, ErrorKind::InvalidArgument, "interval L must be positive");
  const double a = spec.edge();
  const double g2 = spec.gamma * spec.gamma;
  LossBound out;
  out.interior = a <= L * kappa * g2;
  out.value = out.interior ? -a * a / (2.0 * kappa * g2) : kappa * g2 * L * L / 2.0 - a * L;
  return out;
}

GdaResult gda_trade_solver(const PoolState& pool, const GdaConfig& config) {
  require(config.eta_alpha > 0.0 && config.eta_beta > 0.0, ErrorKind::InvalidArgument,
          "step sizes must be positive");
  require(config.max_steps >= 1, ErrorKind::InvalidArgument, "max_steps must be at least 1");
  require(std::isfinite(config.target_price) && config.target_price > 0.0, ErrorKind::InvalidArgument,
          "target price must be positive");
  require(config.tolerance > 0.0, ErrorKind::InvalidArgument, "tolerance must be positive");

  const CfmmKind& kind = pool.kind();
  const double p = config.target_price;
  const double r0 = pool.reserve_traded();
  const double rp0 = pool.reserve_numeraire();
  const double k = trading_function(kind, r0, rp0);
  const double r_tol = config.tolerance * std::max(1.0, std::abs(k));
  constexpr double kRound = 64.0 * std::numeric_limits<double>::epsilon();

  const Partials d0 = trading_partials(kind, r0, rp0);
  const double dh0 = d0.dxx - p * d0.dxy;
  const double dy0 = d0.dy;

  GdaResult out;
  auto measure = [&](double x, double y) {
    const Partials d = trading_partials(kind, x, y);
    out.residual = std::abs(d.dx - p * d.dy);
    const double r = trading_function(kind, x, y) - k;
    out.invariant_residual = std::abs(r) / std::max(1.0, std::abs(k));
    const double h_tol = std::max(config.tolerance, kRound * (std::abs(d.dx) + p * std::abs(d.dy)));
    return out.residual <= h_tol && std::abs(r) <= std::max(r_tol, kRound * std::abs(k));
  };

  if (measure(r0, rp0)) {
    out.converged = true;
    out.stop_reason = "tolerance";
    return out;
  }
  require(dh0 != 0.0 && dy0 != 0.0, ErrorKind::Diverged,
          "price is flat in the traded reserve; the target price cannot be reached");

  double delta = 0.0;
  double delta_prime = 0.0;
  double dh_max2 = dh0 * dh0;
  double dy_max2 = dy0 * dy0;
  for (int step = 1; step <= config.max_steps; ++step) {
    double x = r0 + delta;
    double y = rp0 - delta_prime;
    const Partials d = trading_partials(kind, x, y);
    const double h = d.dx - p * d.dy;
    // Steps are scaled by the largest squared slope seen so far, which keeps
    // the iteration stable when h steepens along the path. No single step
    // may move a reserve by more than half of itself.
    const double dh = d.dxx - p * d.dxy;
    dh_max2 = std::max(dh_max2, dh * dh);
    const double step_x = config.eta_alpha * h * dh / dh_max2;
    delta -= std::clamp(step_x, -0.5 * x, 0.5 * x);
    x = r0 + delta;
    require(std::isfinite(x) && x > 0.0, ErrorKind::Diverged,
            "iterate left the domain at step " + std::to_string(step));
    const double r = trading_function(kind, x, y) - k;
    const double dy = trading_partials(kind, x, y).dy;
    dy_max2 = std::max(dy_max2, dy * dy);
    const double step_y = config.eta_beta * r * dy / dy_max2;
    delta_prime += std::clamp(step_y, -0.5 * y, 0.5 * y);
    y = rp0 - delta_prime;
    require(std::isfinite(y) && y > 0.0 && std::isfinite(delta_prime), ErrorKind::Diverged,
            "iterate left the domain at step " + std::to_string(step));

    out.delta = delta;
    out.delta_prime = delta_prime;
    out.steps_used = step;
    if (measure(x, y)) {
      out.converged = true;
      out.stop_reason = "tolerance";
      return out;
    }
  }
  out.stop_reason = "max_steps";
  return out;
}

std::vector<MultiperiodRow> multiperiod_sim(const PoolState& pool, const std::vector<double>& alphas,
                                            const std::vector<TargetPair>& targets, const GdaConfig& config,
                                            std::uint64_t seed) {
  require(alphas.size() == targets.size(), ErrorKind::InvalidArgument,
          "alphas and targets must have the same length");
  for (double a : alphas) {
    require(a >= 0.5 && a <= 1.0, ErrorKind::InvalidArgument, "alpha_t must lie in [1/2, 1]");
  }

  // Reserves after a GDA trade towards `price` from `state`.
  auto informed_state = [&](const PoolState& state, double price) {
    GdaConfig c = config;
    c.target_price = price;
    const GdaResult r = gda_trade_solver(state, c);
    require(r.converged, ErrorKind::Diverged, "GDA stopped after max_steps without reaching the target price");
    return state.with_reserves(state.reserve_traded() + r.delta, state.reserve_numeraire() - r.delta_prime);
  };

  std::mt19937_64 rng(seed);
  PoolState current = pool.with_fee(1.0);
  double r_exp = current.reserve_traded();
  double rp_exp = current.reserve_numeraire();
  std::vector<MultiperiodRow> rows;
  rows.reserve(alphas.size());
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    const double alpha = alphas[t];
    const TargetPair& target = targets[t];

    // Both trades end at the point of the invariant with the given price, so
    // the increments are linear in the starting reserves and the recursion
    // can be run on the expected state.
    const PoolState informed_from_start = informed_state(pool.with_fee(1.0), target.predicted);
    const PoolState oracle_from_start = move_to_price(pool.with_fee(1.0), target.alternative);
    const double d_informed = informed_from_start.reserve_traded() - r_exp;
    const double d_oracle = oracle_from_start.reserve_traded() - r_exp;
    const double dp_informed = informed_from_start.reserve_numeraire() - rp_exp;
    const double dp_oracle = oracle_from_start.reserve_numeraire() - rp_exp;
    r_exp += alpha * d_informed + (1.0 - alpha) * d_oracle;
    rp_exp += alpha * dp_informed + (1.0 - alpha) * dp_oracle;

    const bool prediction_holds = unit_uniform(rng()) < alpha;
    current = prediction_holds ? informed_state(current, target.predicted)
                               : move_to_price(current, target.alternative);

    rows.push_back(MultiperiodRow{static_cast<int>(t) + 1, alpha, current.reserve_traded(),
                                  current.reserve_numeraire(), r_exp, rp_exp});
  }
  return rows;
}

void to_json(nlohmann::json& j, const EdgeOptimum& r) {
  j = nlohmann::json{{"delta_opt", r.delta_opt}, {"value", r.value}, {"lower_bound", r.lower_bound}, {"mu", r.mu}};
}

void to_json(nlohmann::json& j, const LossBound& r) {
  j = nlohmann::json{{"value", r.value}, {"branch", r.interior ? "interior" : "boundary"}};
}

void to_json(nlohmann::json& j, const GdaResult& r) {
  j = nlohmann::json{{"delta", r.delta},
                     {"delta_prime", r.delta_prime},
                     {"steps_used", r.steps_used},
                     {"residual", r.residual},
                     {"invariant_residual", r.invariant_residual},
                     {"converged", r.converged},
                     {"stop_reason", r.stop_reason}};
}

}  // namespace cfmm
