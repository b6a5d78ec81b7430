#include "cfmm/kernels.hpp"

#include <limits>

#include "cfmm/error.hpp"

namespace cfmm {

std::vector<CurvaturePoint> curvature_sweep(const std::vector<PoolState>& pools, double kappa_frac, Execution exec) {
  require(kappa_frac > 0.0 && kappa_frac < 1.0, ErrorKind::InvalidArgument, "kappa fraction must lie in (0, 1)");
  std::vector<CurvaturePoint> out(pools.size());
  for_each_index(pools.size(), exec, [&](std::size_t i) {
    CurvaturePoint& p = out[i];
    p.kappa_interval = kappa_frac * pools[i].reserve_traded();
    try {
      p.mu = mu_estimate(pools[i]);
      p.kappa = kappa_closed_form(pools[i], p.kappa_interval).kappa;
    } catch (const Error& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      p.mu = CurvatureBounds{nan, nan, nan};
      p.kappa = nan;
      p.error = e.kind();
    }
  });
  return out;
}

std::vector<PairOutcome> resolve_pairs(const std::vector<MarketPair>& pairs, Execution exec) {
  std::vector<PairOutcome> out(pairs.size());
  for_each_index(pairs.size(), exec, [&](std::size_t i) {
    PairOutcome& o = out[i];
    o.cert = certify_pair(pairs[i]);
    o.result = no_arb_pair(pairs[i], o.cert.mu, o.cert.kappa);
    o.bound_holds = o.result.price_move <= o.result.bound + 1e-9;
  });
  return out;
}

std::vector<std::vector<TrajectoryRow>> simulate_batch(const PoolState& external, const PoolState& secondary,
                                                       double sigma, int rounds,
                                                       const std::vector<std::uint64_t>& seeds, Execution exec) {
  std::vector<std::vector<TrajectoryRow>> out(seeds.size());
  for_each_index(seeds.size(), exec, [&](std::size_t i) {
    out[i] = simulate_rounds(external, secondary, PriceProcess::walk(sigma, seeds[i]), rounds);
  });
  return out;
}

std::vector<MultiperiodRow> multiperiod_batch(const PoolState& pool, const std::vector<double>& alphas,
                                              const std::vector<TargetPair>& targets, const GdaConfig& config,
                                              const std::vector<std::uint64_t>& seeds, Execution exec) {
  require(!alphas.empty(), ErrorKind::InvalidArgument, "need at least one round");
  std::vector<MultiperiodRow> out(seeds.size());
  for_each_index(seeds.size(), exec, [&](std::size_t i) {
    out[i] = multiperiod_sim(pool, alphas, targets, config, seeds[i]).back();
  });
  return out;
}

std::vector<GreeksReport> greeks_sweep(const PoolState& pool, const std::vector<double>& prices, Execution exec) {
  std::vector<GreeksReport> out(prices.size());
  for_each_index(prices.size(), exec, [&](std::size_t i) { out[i] = greeks_two_asset(pool, prices[i]); });
  return out;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = splitmix64(base + i);
  return seeds;
}

}  // namespace cfmm
