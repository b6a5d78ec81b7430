#pragma once

// LP portfolio Greeks at the no-arbitrage state for a price m, hedge bounds
// along a sale into the pool, and static replication of 1/F with calls.
//
// With P_V(m) = m R(m) + R'(m) on the invariant, m dR + dR' = 0, so
// P_Delta = R and P_Gamma = dR/dm.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cfmm/pool.hpp"
#include "json.hpp"

namespace cfmm {

struct GreeksReport {
  double price = 0.0;
  double p_v = 0.0;
  double p_delta = 0.0;
  double p_gamma = 0.0;
  double reserve_traded = 0.0;
  double reserve_numeraire = 0.0;
  double d_numeraire_dm = 0.0;  // dR'/dm = -m dR/dm
};

// Rate of change of the pool price along the invariant as the traded reserve
// grows, dm/dx at (x, y). Negative for strictly convex pools, zero for
// constant sum.
double price_slope(const CfmmKind& kind, double x, double y);

// Moves the pool to price m and evaluates the Greeks there. Constant product
// uses R = sqrt(k / m); the other kinds differentiate the invariant
// implicitly. Constant sum raises OutOfRange away from its fixed price and
// NotDifferentiable at it.
GreeksReport greeks_two_asset(const PoolState& pool, double m);

// Invariant on n reserves. The gradient is optional; without it central
// differences are used.
struct NAssetInvariant {
  std::function<double(const std::vector<double>&)> value;
  std::function<std::vector<double>(const std::vector<double>&)> gradient;

  std::vector<double> grad(const std::vector<double>& r) const;
};

struct NAssetGreeks {
  std::vector<double> prices;       // d_i Psi / d_n Psi, 1 at the numeraire
  std::vector<double> p_delta;      // R_i + sum_j m_j dR_j/dm_i
  std::vector<double> p_delta_cross;  // R_i + sum_{j != i} (m_j - 1) dR_j/dm_i
  std::vector<double> p_gamma;      // dR_i/dm_i
  // sensitivity[i][j] = dR_j / dm_i; the numeraire row is zero.
  std::vector<std::vector<double>> sensitivity;
};

// Perturbs each non-numeraire price by +-h and re-projects onto the level set
// with Newton steps on a numeric Jacobian. Raises SingularJacobian when the
// linearized system cannot be solved and Diverged when Newton stalls.
NAssetGreeks greeks_n_asset(const NAssetInvariant& psi, const std::vector<double>& reserves,
                            std::size_t numeraire, double rel_step = 1e-4);

// Reserves on the level set of `reserves` whose prices equal `prices`
// (numeraire entry ignored).
std::vector<double> n_asset_no_arb_state(const NAssetInvariant& psi, const std::vector<double>& reserves,
                                         const std::vector<double>& prices, std::size_t numeraire);

// The LP sells `delta` >= 0 into the pool, so the price is g(-delta) and the
// traded reserve is R + delta. ddelta_dm = -1 / g'(-delta). The linear bounds
// mu (R+delta) ddelta_dm <= exact <= kappa (R+delta) ddelta_dm bracket
// exact = -(R + delta) whenever kappa <= g'(-t) <= mu on the range sampled.
struct HedgeBounds {
  double lower = 0.0;
  double upper = 0.0;
  double exact = 0.0;
  double p_delta = 0.0;            // R + delta
  double value_sensitivity = 0.0;  // g'(-delta)(R + delta), the fall in P_V per unit sold
  double ddelta_dm = 0.0;
  bool holds = false;
};

HedgeBounds hedge_bounds(const PoolState& pool, double delta, double mu, double kappa);

// Static replication of h(F) = 1/F above a cutoff c = xi + epsilon:
// 1/F = 1/c - (F - c)/c^2 + integral_c^inf (2/K^3)(F - K)_+ dK.
struct ReplicationPortfolio {
  double cutoff = 0.0;
  double epsilon = 0.0;
  std::vector<double> strikes;
  std::vector<double> weights;  // 2 / K^3

  double lower() const { return cutoff + epsilon; }
};

ReplicationPortfolio carr_madan_weights(double cutoff, double epsilon, const std::vector<double>& strikes);

// n + 1 evenly spaced strikes on [lower, k_max].
std::vector<double> uniform_strikes(double lower, double k_max, std::size_t intervals);

// Composite Simpson of (2/K^3)(F - K)_+ over the portfolio's strikes, with
// the panel containing F split there so the kink never sits inside a panel.
double carr_madan_integral(const ReplicationPortfolio& portfolio, double F);

struct CarrMadanCheck {
  double options_integral = 0.0;
  double target = 0.0;    // 1/F - 1/c + (F - c)/c^2, zero when F <= c
  double residual = 0.0;  // |options_integral - target|
  std::size_t intervals = 0;
};

// Refines a uniform grid on [c, max(10 F, 10 c)] by halving until the
// residual is at most `tol`. Raises GridTooCoarse after `max_refinements`.
CarrMadanCheck carr_madan_check(double F, double cutoff, double epsilon, double tol = 1e-8,
                                std::size_t initial_intervals = 16, int max_refinements = 24);

void to_json(nlohmann::json& j, const GreeksReport& r);
void to_json(nlohmann::json& j, const NAssetGreeks& r);
void to_json(nlohmann::json& j, const HedgeBounds& r);
void to_json(nlohmann::json& j, const CarrMadanCheck& r);

}  // namespace cfmm
