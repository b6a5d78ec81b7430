#pragma once

// Two-asset constant function market makers.
//
// Sign conventions: a trade (delta, delta_prime) pays `delta` of the traded
// coin out of the pool and takes `delta_prime` of the numeraire in, so the
// reserves move to (R - delta, R' + delta_prime). Positive delta buys the
// traded coin from the pool; negative delta sells it to the pool.

#include <string>
#include <variant>

#include "json.hpp"

namespace cfmm {

struct ConstantSum {
  bool operator==(const ConstantSum&) const = default;
};
struct ConstantProduct {
  bool operator==(const ConstantProduct&) const = default;
};
struct GeometricMean {
  double tau;  // weight of the traded coin, 0 < tau < 1
  bool operator==(const GeometricMean&) const = default;
};
struct Curve {
  double alpha;
  double beta;
  bool operator==(const Curve&) const = default;
};

using CfmmKind = std::variant<ConstantSum, ConstantProduct, GeometricMean, Curve>;

std::string kind_name(const CfmmKind& kind);

// The kind that describes the same market after exchanging the roles of the
// traded coin and the numeraire.
CfmmKind swapped_kind(const CfmmKind& kind);

// Trading function Psi(x, y) over post-trade reserves and its partials.
struct Partials {
  double dx;
  double dy;
  double dxx;
  double dyy;
  double dxy;
};

double trading_function(const CfmmKind& kind, double x, double y);
Partials trading_partials(const CfmmKind& kind, double x, double y);

// Numeraire reserve y on the level set Psi(x, y) = level.
double level_set_numeraire(const CfmmKind& kind, double x, double level);

// Positive root of the Curve level-set quadratic, written in a cancellation-free
// form. Used to cross-check the bracketed solve.
double curve_numeraire_closed_form(double alpha, double beta, double level, double x);

struct TradeDomain {
  double delta_min;  // most negative trade (largest sale into the pool)
  double delta_max;  // largest purchase from the pool
};

class PoolState {
 public:
  PoolState(CfmmKind kind, double reserve_traded, double reserve_numeraire, double fee_gamma = 1.0);

  const CfmmKind& kind() const noexcept { return kind_; }
  double reserve_traded() const noexcept { return reserve_traded_; }
  double reserve_numeraire() const noexcept { return reserve_numeraire_; }
  double fee_gamma() const noexcept { return fee_gamma_; }

  PoolState with_reserves(double reserve_traded, double reserve_numeraire) const;
  PoolState with_kind(CfmmKind kind) const;
  PoolState with_fee(double fee_gamma) const;

  // Same pool quoted in the other coin: reserves exchanged, kind mirrored.
  PoolState swapped() const;

  bool operator==(const PoolState&) const = default;

 private:
  CfmmKind kind_;
  double reserve_traded_;
  double reserve_numeraire_;
  double fee_gamma_;
};

// psi(0, 0): the value every accepted trade must preserve.
double invariant_value(const PoolState& pool);

// Reserves may not fall below this fraction of their starting value.
inline constexpr double kReserveFloor = 1e-9;

TradeDomain trade_domain(const PoolState& pool);

// Numeraire delta_prime paid into the pool for a fee-less trade of `delta`.
double trade_output(const PoolState& pool, double delta);

// g(delta) = -d1 psi / d2 psi on the invariant.
double marginal_price(const PoolState& pool, double delta);

// gamma * g(gamma * delta) for sales into the pool (delta <= 0).
double marginal_price_with_fee(const PoolState& pool, double delta);

double portfolio_value(const PoolState& pool, double price);

// Smallest value c_traded * x + c_numeraire * y over reserves (x, y) on or
// above the pool's current level set. This is the fee-less portfolio value
// floor that fee-bearing trading can never push the pool below.
double min_portfolio_value(const PoolState& pool, double c_traded, double c_numeraire);

// Pool price g(0).
inline double spot_price(const PoolState& pool) { return marginal_price(pool, 0.0); }

struct TradeExecution {
  PoolState after;
  double delta;        // traded coin paid out (negative: received)
  double delta_prime;  // numeraire received (negative: paid out)
};

// Fee-bearing execution. The fee is charged on whichever coin flows into the
// pool: sales use psi(gamma * delta, delta_prime) = psi(0, 0); purchases are
// the mirror image, so the numeraire input is delta_prime_feeless / gamma.
TradeExecution execute_trade(const PoolState& pool, double delta);

// Fee-less execution along the current invariant.
TradeExecution execute_feeless(const PoolState& pool, double delta);

void to_json(nlohmann::json& j, const PoolState& pool);
PoolState pool_from_json(const nlohmann::json& j);

}  // namespace cfmm
