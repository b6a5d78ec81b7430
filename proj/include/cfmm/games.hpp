#pragma once

// Payoffs between liquidity providers and traders: the trade size below
// which an uninformed trade is profitable for LPs, the informed trader's
// expected edge, and a gradient descent-ascent solver for the multiperiod
// informed trader.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfmm/pool.hpp"
#include "cfmm/price_impact.hpp"
#include "json.hpp"

namespace cfmm {

// Price starts at m0 = gamma * g(0) and falls to m1 with probability alpha.
struct GameSpec {
  double alpha = 0.5;
  double m0 = 1.0;
  double m1 = 1.0;
  double gamma = 1.0;
  double interval_L = 1.0;

  void validate() const;
  double edge() const { return alpha * (m0 - m1); }
  // Expected price after the move.
  double expected_price() const { return alpha * m1 + (1.0 - alpha) * m0; }
};

// Largest trade size for which LPs are guaranteed a profit: (1 - gamma) m_a / mu.
// Infinite when mu = 0, since any trade is then profitable.
double max_profitable_trade(const PoolState& pool, double m_a);

struct OpportunityCost {
  double exact = 0.0;  // g(-delta) delta - delta', fee-less
  double bound = 0.0;  // -mu delta^2
};

OpportunityCost impermanent_loss_lb(const PoolState& pool, double delta);

// E_V(delta) = integral_0^delta gamma g(-gamma t) dt - (alpha m1 + (1 - alpha) m0) delta.
double informed_edge(const GameSpec& spec, const PriceImpactFn& g, double delta);

// The LP's expected payoff against an informed trade of size delta. It is
// exactly -informed_edge.
double lp_expected_payoff(const GameSpec& spec, const PriceImpactFn& g, double delta);

struct EdgeOptimum {
  double delta_opt = 0.0;
  double value = 0.0;
  double lower_bound = 0.0;  // alpha^2 (m0 - m1)^2 / (2 mu gamma^2)
  double mu = 0.0;
};

// Maximizes E_V over the sell-side domain. mu defaults to g'(0) (closed form
// for pools, numeric otherwise). Requires m0 = gamma g(0) to 1e-9 relative.
EdgeOptimum informed_edge_opt(const GameSpec& spec, const PriceImpactFn& g,
                              std::optional<double> mu = std::nullopt);

struct LossBound {
  double value = 0.0;
  bool interior = true;  // the optimum lies inside [0, L]
};

LossBound lp_loss_bound(const GameSpec& spec, double kappa, double L);

// Step multipliers are relative: each update is scaled by the squared
// derivative at the starting point, so eta = 1 is a Newton step there.
struct GdaConfig {
  double eta_alpha = 0.5;  // descent on h over delta
  double eta_beta = 0.5;   // ascent on the invariant residual over delta'
  int max_steps = 100000;
  double target_price = 1.0;
  double tolerance = 1e-10;
};

struct GdaResult {
  double delta = 0.0;        // traded coin sold to the pool (negative: bought)
  double delta_prime = 0.0;  // numeraire taken from the pool
  int steps_used = 0;
  double residual = 0.0;            // |h| at the last iterate
  double invariant_residual = 0.0;  // |Psi - k| / |k|
  bool converged = false;
  std::string stop_reason;   // "tolerance" or "max_steps"
};

// Iterates the coupled updates on h = Psi_x - p Psi_y and the invariant at
// x = R + delta, y = R' - delta'. Raises Diverged when the iterates leave the
// positive quadrant or stop being finite.
GdaResult gda_trade_solver(const PoolState& pool, const GdaConfig& config);

struct TargetPair {
  double predicted = 1.0;    // price the informed trader trades towards
  double alternative = 1.0;  // realized price when the prediction fails
};

struct MultiperiodRow {
  int t = 0;
  double alpha = 0.0;
  double R = 0.0;
  double R_prime = 0.0;
  double R_expected = 0.0;
  double R_prime_expected = 0.0;
};

// Each round the prediction comes true with probability alpha_t; the pool
// then receives the GDA trade towards the predicted price, otherwise the
// no-arbitrage trade towards the alternative. Expected reserves follow
// E[R(t+1)] = R(t) + alpha_t Delta_T + (1 - alpha_t) Delta_hat.
std::vector<MultiperiodRow> multiperiod_sim(const PoolState& pool, const std::vector<double>& alphas,
                                            const std::vector<TargetPair>& targets, const GdaConfig& config,
                                            std::uint64_t seed);

void to_json(nlohmann::json& j, const EdgeOptimum& r);
void to_json(nlohmann::json& j, const LossBound& r);
void to_json(nlohmann::json& j, const GdaResult& r);

}  // namespace cfmm
