#pragma once

// Batch evaluation over independent inputs. Every kernel has a serial
// reference path and an OpenMP path; each item writes only its own output
// slot, so both paths return bit-identical results in input order.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <vector>

#include "cfmm/arbitrage.hpp"
#include "cfmm/curvature.hpp"
#include "cfmm/error.hpp"
#include "cfmm/games.hpp"
#include "cfmm/greeks.hpp"

namespace cfmm {

enum class Execution { Serial, Parallel };

// Runs body(i) for i in [0, n). Exceptions are captured per item and the one
// with the lowest index is rethrown after the loop, whichever path ran.
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct CurvaturePoint {
  CurvatureBounds mu;
  double kappa = 0.0;        // secant slope on [0, kappa_interval]
  double kappa_interval = 0.0;
  std::optional<ErrorKind> error;  // set when this point has no estimate; values are NaN
};

// mu_estimate for every pool and the secant kappa on [0, frac * R] for each.
// A point that cannot be estimated records its error instead of aborting.
std::vector<CurvaturePoint> curvature_sweep(const std::vector<PoolState>& pools, double kappa_frac, Execution exec);

struct PairOutcome {
  CurvatureBounds cert;
  NoArbResult result;
  bool bound_holds = false;  // price_move <= bound + 1e-9
};

// Certifies and resolves each pair.
std::vector<PairOutcome> resolve_pairs(const std::vector<MarketPair>& pairs, Execution exec);

// Runs simulate_rounds once per seed with a multiplicative walk.
std::vector<std::vector<TrajectoryRow>> simulate_batch(const PoolState& external, const PoolState& secondary,
                                                       double sigma, int rounds,
                                                       const std::vector<std::uint64_t>& seeds, Execution exec);

// Final row of multiperiod_sim for each seed.
std::vector<MultiperiodRow> multiperiod_batch(const PoolState& pool, const std::vector<double>& alphas,
                                              const std::vector<TargetPair>& targets, const GdaConfig& config,
                                              const std::vector<std::uint64_t>& seeds, Execution exec);

std::vector<GreeksReport> greeks_sweep(const PoolState& pool, const std::vector<double>& prices, Execution exec);

// Seeds for independent runs derived from one base seed.
std::vector<std::uint64_t> derive_seeds(std::uint64_t base, std::size_t count);

}  // namespace cfmm
