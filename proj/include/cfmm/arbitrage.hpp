#pragma once

// No-arbitrage resolution between an external market f and a secondary
// market g, and the round-based two-market simulation.
//
// The arbitrageur buys delta of the traded coin from the external market at
// marginal price f(delta) and sells it into the secondary market, whose price
// falls to g(-delta). Resolution is the delta* where the two prices meet.

#include <cstdint>
#include <limits>
#include <vector>

#include "cfmm/curvature.hpp"
#include "cfmm/pool.hpp"
#include "cfmm/price_impact.hpp"
#include "json.hpp"

namespace cfmm {

struct MarketPair {
  PriceImpactFn external;   // f, read on the buy side
  PriceImpactFn secondary;  // g, read on the sell side
  double m0_e = 0.0;
  double m0_s = 0.0;
  bool swapped = false;     // prices are quoted in the other coin
};

// Pair in the given orientation; requires f(0) <= g(0).
MarketPair make_pair(PriceImpactFn external, PriceImpactFn secondary);

struct NoArbResult {
  double delta_star = 0.0;
  double m_a = 0.0;
  double price_move = 0.0;       // m0_s - m_a
  double bound = 0.0;            // (mu / kappa) * (m0_s - m0_e)
  double overshoot_delta = 0.0;  // (m0_s - m0_e) / kappa
};

// Sale size delta* with g(-delta*) = m_a against an infinitely liquid
// market at price m_a.
double no_arb_infinite(const PriceImpactFn& g, double m_a);

// Bisection on f(delta) - g(-delta) over [0, overshoot]. With kappa = 0 the
// external market is treated as infinitely liquid unless a finite
// `search_cap` is given.
NoArbResult no_arb_pair(const MarketPair& pair, double mu, double kappa,
                        double search_cap = std::numeric_limits<double>::infinity());

double stability_bound(double mu, double kappa, double m0_s, double m0_e);
bool check_interval_condition(double mu, double kappa, double L, double m0_s, double m0_e);

// Reorders a pair so that the external price is the lower one. Pool-backed
// functions are mirrored exactly; other functions go through the inverse of
// the quantity function.
MarketPair normalize_orientation(const PriceImpactFn& f, const PriceImpactFn& g);

// Price impact of the same market quoted in the other coin:
// f~(d) = 1 / f(q^{-1}(-d)) with q the quantity function of f.
PriceImpactFn mirrored_impact(const PriceImpactFn& f);

// A bound converted back to the original quotation after resolving a pair
// in mirrored units (prices 1/m).
double unmirror_bound(double m0_s, double mirrored_bound);

// mu for g and kappa for f valid on a common interval [0, L] with
// m0_s - m0_e <= kappa * L. Convex pool kinds use their global constants;
// other functions are certified by sampling on a growing interval.
CurvatureBounds certify_pair(const MarketPair& pair);

// ---------------------------------------------------------------------------
// Round-based simulation.

struct PriceProcess {
  enum class Kind { Series, MultiplicativeWalk };
  Kind kind = Kind::Series;
  std::vector<double> log_returns;  // Series: one per round (missing = 0)
  double sigma = 0.0;               // Walk: log-return uniform in [-sigma, sigma]
  std::uint64_t seed = 0;

  static PriceProcess series(std::vector<double> log_returns);
  static PriceProcess walk(double sigma, std::uint64_t seed);
};

struct TrajectoryRow {
  int round = 0;
  double m0_e = 0.0;
  double m0_s = 0.0;
  double m_a = 0.0;
  double delta_star = 0.0;  // change of the secondary pool's traded reserve
  double bound = 0.0;
  double pv_lp = 0.0;       // secondary LP value at m_a after arbitrage
};

// Moves a pool along its invariant until its spot price equals `price`.
PoolState move_to_price(const PoolState& pool, double price);

// Each round: shock the external price (the external pool is moved to the
// new price), resolve the pair fee-less and advance both pools.
std::vector<TrajectoryRow> simulate_rounds(const PoolState& external, const PoolState& secondary,
                                           const PriceProcess& process, int rounds);

// Portable uniform draw in [0, 1) with 53 random bits.
double unit_uniform(std::uint64_t bits);
std::uint64_t splitmix64(std::uint64_t x);

void to_json(nlohmann::json& j, const NoArbResult& r);

}  // namespace cfmm
