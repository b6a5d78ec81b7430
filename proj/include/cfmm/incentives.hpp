#pragma once

// Subsidies that keep liquidity providers whole: the amount sufficient to
// cover the loss from one arbitrage round, and the excess loss between two
// geometric mean pools trading the same flow.

#include <vector>

#include "cfmm/arbitrage.hpp"
#include "cfmm/pool.hpp"
#include "json.hpp"

namespace cfmm {

struct SubsidyResult {
  double subsidy_numeraire = 0.0;  // (mu / kappa) (m0_s - m0_e)
  double subsidy_traded = 0.0;     // (mu / kappa) (1 - h)
  double growth_h = 1.0;           // m0_e / m0_s
  double ratio_mu_kappa = 0.0;
};

SubsidyResult sufficient_subsidy(double mu, double kappa, double m0_s, double m0_e);

struct SubsidyReport {
  bool pass = false;
  double delta_star = 0.0;
  double m_a = 0.0;
  double realized_cost = 0.0;  // m_a delta* - integral_0^delta* g(-t) dt, at most zero
  double subsidy = 0.0;
  double slack = 0.0;          // realized_cost + subsidy
  // The per-unit bound (m_a - m0_s) delta >= -(mu/kappa)(m0_s - m0_e) covers
  // the realized loss when delta* <= 1.
  bool unit_trade = false;
};

// Resolves the pair (curvature certified by certify_pair) and checks that the
// subsidy covers the LP's realized opportunity cost.
SubsidyReport verify_subsidy(const MarketPair& pair, const SubsidyResult& subsidy);

// delta = (R2 - delta) / tau2 - (R1 - delta) / tau1 for two geometric mean
// pools at a common spot price, after both sell `delta` of the traded coin.
double balancer_excess_loss(const PoolState& pool1, const PoolState& pool2, double delta);

struct SubsidyStep {
  int t = 0;
  double delta = 0.0;
  double excess_loss = 0.0;
  double cumulative = 0.0;
};

// Applies each trade to both pools in turn and accumulates the per-step
// excess loss on the updated reserves. Only the starting prices must agree.
std::vector<SubsidyStep> cumulative_subsidy(const PoolState& pool1, const PoolState& pool2,
                                            const std::vector<double>& trades);

void to_json(nlohmann::json& j, const SubsidyResult& r);
void to_json(nlohmann::json& j, const SubsidyReport& r);

}  // namespace cfmm
