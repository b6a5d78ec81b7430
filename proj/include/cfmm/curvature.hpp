#pragma once

// Curvature constants of a price impact function.
//
//   mu-stability:   g(0) - g(-delta) <= mu * delta      for 0 <= delta <= L
//   kappa-liquidity: g(0) - g(-delta) >= kappa * delta   for 0 <= delta <= L
//
// For a convex g the tightest global mu is g'(0), and the tightest kappa on
// [0, L] is the secant slope (g(0) - g(-L)) / L.

#include <cstddef>

#include "cfmm/pool.hpp"
#include "cfmm/price_impact.hpp"
#include "json.hpp"

namespace cfmm {

struct CurvatureBounds {
  double mu = 0.0;
  double kappa = 0.0;
  double interval_L = 0.0;  // +infinity for a global bound

  bool is_global() const;
};

// Tightest mu for the pool's kind. Constant product and geometric mean pools
// have convex g, so the bound is global. Curve uses the at-peg formula and
// raises PegRequired when g(0) differs from 1 by more than 1e-9; its g is not
// convex everywhere, so the returned interval is the largest one on which
// g'(0) still bounds the price drop.
CurvatureBounds mu_closed_form(const PoolState& pool);

// Closed form where one exists, otherwise mu_numeric on the pool's g.
CurvatureBounds mu_estimate(const PoolState& pool);

// Secant-slope kappa on [0, L].
CurvatureBounds kappa_closed_form(const PoolState& pool, double L);

// Backward-difference estimate of g'(0) with one Richardson step. Raises
// NonConvexDetected when g is visibly non-convex just below zero.
double mu_numeric(const PriceImpactFn& g);

double kappa_numeric(const PriceImpactFn& g, double L);

// Which side of zero a certificate covers: Sell bounds g(0) - g(-delta),
// Buy bounds g(delta) - g(0).
enum class Side { Sell, Buy };

// Sampled certificate on (0, L]: mu is the largest and kappa the smallest
// secant slope from zero, each refined by a local golden-section search.
// Works for non-convex g, where g'(0) is not the tightest mu.
CurvatureBounds certify_bounds(const PriceImpactFn& g, double L, Side side, std::size_t samples = 512);

// Largest L for which g(0) - g(-delta) <= mu * delta holds on (0, L].
// Infinity when the bound holds on the whole sell-side domain.
double mu_validity_interval(const PriceImpactFn& g, double mu);

struct StabilityReport {
  bool pass = true;
  std::size_t samples = 0;
  double interval = 0.0;            // the L actually checked
  double min_upper_slack = 0.0;     // min over samples of mu*delta - drop
  double min_upper_slack_at = 0.0;  // delta where it occurs
  double min_lower_slack = 0.0;     // min over samples of drop - kappa*delta
  double min_lower_slack_at = 0.0;
  bool nonconvex_warning = false;   // sampled secant slopes decreased
};

// Checks kappa*delta <= g(0) - g(-delta) <= mu*delta on `samples` evenly
// spaced points of (0, L]. Violations are reported, never thrown.
StabilityReport verify_stability(const PriceImpactFn& g, const CurvatureBounds& bounds, std::size_t samples);

// Gaussian curvature of the level set psi(delta, delta') = psi(0, 0) at the
// given point, signed so that a convex price impact gives a positive value.
double gaussian_curvature(const PoolState& pool, double delta, double delta_prime);

struct ConvexityCheck {
  bool holds = false;
  double a = 0.0;              // alpha * x^2 * y
  double b = 0.0;              // alpha * x * y^2
  double a_margin = 0.0;       // a - beta
  double b_margin = 0.0;       // b - alpha
  double reserve_product = 0;  // x * y
  bool reserve_condition = false;  // x * y > 1
};

// Sufficient condition for Curve's price impact to be convex at the point
// with post-trade reserves x = R - delta, y = R' + delta'.
ConvexityCheck curve_convexity_check(const PoolState& pool, double delta, double delta_prime);

void to_json(nlohmann::json& j, const CurvatureBounds& b);
void to_json(nlohmann::json& j, const StabilityReport& r);

}  // namespace cfmm
