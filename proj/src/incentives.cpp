#include "cfmm/incentives.hpp"

#include <cmath>

#include "cfmm/curvature.hpp"
#include "cfmm/error.hpp"
#include "cfmm/numerics.hpp"

namespace cfmm {

SubsidyResult sufficient_subsidy(double mu, double kappa, double m0_s, double m0_e) {
  require(kappa > 0.0, ErrorKind::KappaZero, "the subsidy needs kappa > 0");
  require(mu >= 0.0, ErrorKind::InvalidArgument, "mu must be nonnegative");
  require(m0_e > 0.0 && m0_e <= m0_s, ErrorKind::InvalidArgument, "need 0 < m0_e <= m0_s");
  SubsidyResult r;
  r.ratio_mu_kappa = mu / kappa;
  r.growth_h = m0_e / m0_s;
  r.subsidy_numeraire = r.ratio_mu_kappa * (m0_s - m0_e);
  r.subsidy_traded = r.ratio_mu_kappa * (1.0 - r.growth_h);
  return r;
}

SubsidyReport verify_subsidy(const MarketPair& pair, const SubsidyResult& subsidy) {
  const CurvatureBounds cert = certify_pair(pair);
  const NoArbResult res = no_arb_pair(pair, cert.mu, cert.kappa);
  SubsidyReport out;
  out.delta_star = res.delta_star;
  out.m_a = res.m_a;
  const double paid = numerics::adaptive_simpson([&](double t) { return pair.secondary(-t); }, 0.0,
                                                 res.delta_star, 1e-13);
  out.realized_cost = res.m_a * res.delta_star - paid;
  out.subsidy = subsidy.subsidy_numeraire;
  out.slack = out.realized_cost + out.subsidy;
  out.pass = out.slack >= -1e-9;
  out.unit_trade = res.delta_star <= 1.0;
  return out;
}

namespace {

double require_geometric(const PoolState& pool) {
  const auto* g = std::get_if<GeometricMean>(&pool.kind());
  require(g != nullptr, ErrorKind::InvalidArgument, "excess loss is defined for geometric mean pools");
  return g->tau;
}

}  // namespace

double balancer_excess_loss(const PoolState& pool1, const PoolState& pool2, double delta) {
  const double tau1 = require_geometric(pool1);
  const double tau2 = require_geometric(pool2);
  const double p1 = spot_price(pool1);
  const double p2 = spot_price(pool2);
  require(std::abs(p1 - p2) <= 1e-9 * std::max(p1, p2), ErrorKind::SpotPriceMismatch,
          "pools quote different spot prices: " + std::to_string(p1) + " vs " + std::to_string(p2));
  trade_output(pool1, delta);  // domain checks
  trade_output(pool2, delta);
  return (pool2.reserve_traded() - delta) / tau2 - (pool1.reserve_traded() - delta) / tau1;
}

std::vector<SubsidyStep> cumulative_subsidy(const PoolState& pool1, const PoolState& pool2,
                                            const std::vector<double>& trades) {
  const double tau1 = require_geometric(pool1);
  const double tau2 = require_geometric(pool2);
  std::vector<SubsidyStep> steps;
  if (trades.empty()) return steps;
  balancer_excess_loss(pool1, pool2, trades.front());  // starting prices must agree

  PoolState a = pool1.with_fee(1.0);
  PoolState b = pool2.with_fee(1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < trades.size(); ++i) {
    a = execute_feeless(a, trades[i]).after;
    b = execute_feeless(b, trades[i]).after;
    const double step = b.reserve_traded() / tau2 - a.reserve_traded() / tau1;
    total += step;
    steps.push_back(SubsidyStep{static_cast<int>(i) + 1, trades[i], step, total});
  }
  return steps;
}

void to_json(nlohmann::json& j, const SubsidyResult& r) {
  j = nlohmann::json{{"subsidy_numeraire", r.subsidy_numeraire},
                     {"subsidy_traded", r.subsidy_traded},
                     {"growth_h", r.growth_h},
                     {"ratio_mu_kappa", r.ratio_mu_kappa}};
}

void to_json(nlohmann::json& j, const SubsidyReport& r) {
  j = nlohmann::json{{"pass", r.pass},         {"delta_star", r.delta_star}, {"m_a", r.m_a},
                     {"realized_cost", r.realized_cost}, {"subsidy", r.subsidy}, {"slack", r.slack},
                     {"unit_trade", r.unit_trade}};
}

}  // namespace cfmm
