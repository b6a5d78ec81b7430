#include "cfmm/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cfmm/error.hpp"
#include "cfmm/numerics.hpp"

namespace cfmm {

using numerics::kInf;

MarketPair make_pair(PriceImpactFn external, PriceImpactFn secondary) {
  const double m0_e = external(0.0);
  const double m0_s = secondary(0.0);
  require(m0_e > 0.0 && m0_s > 0.0, ErrorKind::InvalidArgument, "market prices must be positive");
  require(m0_e <= m0_s, ErrorKind::InvalidArgument, "external price must not exceed the secondary price");
  return MarketPair{std::move(external), std::move(secondary), m0_e, m0_s, false};
}

double no_arb_infinite(const PriceImpactFn& g, double m_a) {
  require(std::isfinite(m_a) && m_a > 0.0, ErrorKind::InvalidArgument, "target price must be positive");
  const double g0 = g(0.0);
  if (m_a == g0) return 0.0;
  require(m_a < g0, ErrorKind::OutOfRange, "target price lies above the pool price");
  const double limit = -g.delta_min();
  require(limit > 0.0 && g(-limit) <= m_a, ErrorKind::OutOfRange,
          "target price " + std::to_string(m_a) + " is below the reachable price floor");
  // Grow the bracket from a small trade so roots near zero stay well scaled.
  double hi = std::min(limit, 1e-3 * g.scale());
  double lo = 0.0;
  while (g(-hi) > m_a && hi < limit) {
    lo = hi;
    hi = std::min(limit, 2.0 * hi);
  }
  return numerics::toms748([&](double d) { return g(-d) - m_a; }, lo, hi);
}

double stability_bound(double mu, double kappa, double m0_s, double m0_e) {
  require(kappa > 0.0, ErrorKind::KappaZero, "the stability bound needs kappa > 0");
  require(m0_e <= m0_s, ErrorKind::InvalidArgument, "external price must not exceed the secondary price");
  return (mu / kappa) * (m0_s - m0_e);
}

bool check_interval_condition(double /*mu*/, double kappa, double L, double m0_s, double m0_e) {
  require(kappa > 0.0, ErrorKind::KappaZero, "the interval condition needs kappa > 0");
  require(m0_e <= m0_s, ErrorKind::InvalidArgument, "external price must not exceed the secondary price");
  return m0_s - m0_e <= kappa * L;
}

NoArbResult no_arb_pair(const MarketPair& pair, double mu, double kappa, double search_cap) {
  require(kappa >= 0.0 && mu >= 0.0, ErrorKind::InvalidArgument, "curvature constants must be nonnegative");
  const double gap = pair.m0_s - pair.m0_e;
  require(gap >= 0.0, ErrorKind::InvalidArgument, "external price must not exceed the secondary price");
  NoArbResult out;
  out.m_a = pair.m0_s;
  if (gap == 0.0) return out;

  if (kappa == 0.0 && !std::isfinite(search_cap)) {
    // Infinitely liquid external market: its price never moves.
    out.delta_star = no_arb_infinite(pair.secondary, pair.m0_e);
    out.m_a = pair.m0_e;
    out.price_move = gap;
    out.bound = kInf;
    out.overshoot_delta = kInf;
    return out;
  }

  out.overshoot_delta = kappa > 0.0 ? gap / kappa : kInf;
  out.bound = kappa > 0.0 ? (mu / kappa) * gap : kInf;
  const double hi = std::min({out.overshoot_delta, search_cap, pair.external.delta_max(),
                              -pair.secondary.delta_min()});
  auto crossing = [&](double d) { return pair.external(d) - pair.secondary(-d); };
  const double at_hi = crossing(hi);
  require(at_hi >= 0.0, ErrorKind::NoCrossing,
          "prices do not cross on [0, " + std::to_string(hi) + "]: f - g = " + std::to_string(at_hi) +
              " at the end of the search interval; the kappa certificate is invalid");
  out.delta_star = numerics::bisect(crossing, 0.0, hi);
  out.m_a = pair.secondary(-out.delta_star);
  out.price_move = pair.m0_s - out.m_a;
  return out;
}

namespace {

// Solves q(d) = v for the quantity function q of f. q is monotone with
// slope f > 0, so Newton steps are safeguarded by a bracket; each step only
// integrates f between consecutive iterates.
double inverse_quantity(const PriceImpactFn& f, double v, double start) {
  if (v == 0.0) return 0.0;
  const double limit = v > 0.0 ? f.delta_max() : f.delta_min();
  if (f.exact_quantity()) {
    const auto& q = f.exact_quantity();
    double lo = 0.0;
    double hi = std::copysign(std::min(std::abs(limit), std::abs(start)), v);
    while (std::abs(q(hi)) < std::abs(v)) {
      if (hi == limit) {
        require(std::abs(v) - std::abs(q(hi)) <= 1e-9 * std::abs(v), ErrorKind::DomainExceeded,
                "quantity outside the mirrored domain");
        return limit;
      }
      lo = hi;
      hi = std::abs(2.0 * hi) > std::abs(limit) ? limit : 2.0 * hi;
    }
    return numerics::toms748([&](double d) { return q(d) - v; }, std::min(lo, hi), std::max(lo, hi));
  }
  auto piece = [&f](double a, double b) {
    return numerics::adaptive_simpson([&f](double t) { return f(t); }, a, b, 1e-14 * std::abs(b - a) * f(0.0));
  };
  // Bracket [lo, hi] on the side of v, with q(lo) on one side and q(hi) beyond.
  double lo = 0.0, q_lo = 0.0;
  double hi = std::copysign(std::min(std::abs(limit), std::abs(start)), v), q_hi = piece(0.0, hi);
  while (std::abs(q_hi) < std::abs(v)) {
    if (hi == limit) {
      require(std::abs(v) - std::abs(q_hi) <= 1e-9 * std::abs(v), ErrorKind::DomainExceeded,
              "quantity outside the mirrored domain");
      return limit;
    }
    const double next = std::abs(2.0 * hi) > std::abs(limit) ? limit : 2.0 * hi;
    lo = hi;
    q_lo = q_hi;
    q_hi += piece(hi, next);
    hi = next;
  }
  double d = lo, q = q_lo;
  for (int i = 0; i < 200; ++i) {
    const double resid = q - v;
    if (std::abs(resid) <= 1e-14 * std::abs(v)) break;
    if ((resid < 0.0) == (v > 0.0)) {
      lo = d;
      q_lo = q;
    } else {
      hi = d;
      q_hi = q;
    }
    double next = d - resid / f(d);
    const bool inside = (next - lo) * (next - hi) < 0.0;
    if (!inside) next = 0.5 * (lo + hi);
    if (next == d || next == lo || next == hi) break;
    // Integrate from whichever known point is nearest.
    const double base = std::abs(next - d) <= std::min(std::abs(next - lo), std::abs(next - hi))
                            ? d
                            : (std::abs(next - lo) < std::abs(next - hi) ? lo : hi);
    const double q_base = base == d ? q : (base == lo ? q_lo : q_hi);
    q = q_base + piece(base, next);
    d = next;
  }
  return d;
}

}  // namespace

PriceImpactFn mirrored_impact(const PriceImpactFn& f) {
  if (f.pool()) return PriceImpactFn::from_pool(f.pool()->swapped());
  const double q_hi = quantity_fn(f, f.delta_max());
  const double q_lo = quantity_fn(f, f.delta_min());
  const double scale = f(0.0) * f.scale();
  auto inverse = [f](double d) { return inverse_quantity(f, -d, std::abs(d) / f(0.0)); };
  auto eval = [f, inverse](double d) { return 1.0 / f(inverse(d)); };
  // Paying d of the other coin moves -q^{-1}(-d) of this one.
  auto quantity = [inverse](double d) { return -inverse(d); };
  return PriceImpactFn::from_function(eval, -q_hi, -q_lo, scale).with_quantity(quantity);
}

MarketPair normalize_orientation(const PriceImpactFn& f, const PriceImpactFn& g) {
  require(f(0.0) > 0.0 && g(0.0) > 0.0, ErrorKind::InvalidArgument, "market prices must be positive");
  if (f(0.0) <= g(0.0)) return make_pair(f, g);
  MarketPair pair = make_pair(mirrored_impact(f), mirrored_impact(g));
  pair.swapped = true;
  return pair;
}

double unmirror_bound(double m0_s, double mirrored_bound) {
  const double inv = 1.0 / m0_s - mirrored_bound;
  if (!(inv > 0.0) || !std::isfinite(mirrored_bound)) return kInf;
  return 1.0 / inv - m0_s;
}

namespace {

bool globally_convex(const std::optional<PoolState>& pool) {
  return pool && (std::holds_alternative<ConstantProduct>(pool->kind()) ||
                  std::holds_alternative<GeometricMean>(pool->kind()) ||
                  std::holds_alternative<ConstantSum>(pool->kind()));
}

}  // namespace

CurvatureBounds certify_pair(const MarketPair& pair) {
  const double gap = pair.m0_s - pair.m0_e;
  const PriceImpactFn& f = pair.external;
  const PriceImpactFn& g = pair.secondary;
  const double room = std::min(f.delta_max(), -g.delta_min());

  double kappa = 0.0;
  double L = kInf;
  if (globally_convex(f.pool())) {
    // Buy side of a convex f: f(d) - f(0) >= f'(0) d for every d >= 0.
    kappa = mu_closed_form(*f.pool()).mu;
  } else {
    const double slope0 = numerics::richardson_one_sided([&](double t) { return f(t); }, 0.0,
                                                         std::min(1e-7 * f.scale(), 1e-3 * room), +1);
    L = std::min(room, slope0 > 0.0 && gap > 0.0 ? 2.0 * gap / slope0 : f.scale());
    for (int i = 0; i < 60; ++i) {
      kappa = certify_bounds(f, L, Side::Buy).kappa;
      if (kappa * L >= gap || L >= room) break;
      L = std::min(room, 2.0 * L);
    }
  }
  if (kappa > 0.0) L = std::min(L, gap > 0.0 ? gap / kappa : L);
  // The witness trade must also fit inside both markets.
  L = std::min(L, room);

  double mu = 0.0;
  if (globally_convex(g.pool())) {
    mu = mu_closed_form(*g.pool()).mu;
  } else {
    const double span = std::min(std::isfinite(L) && L > 0.0 ? L : g.scale(), -g.delta_min());
    mu = certify_bounds(g, span, Side::Sell).mu;
  }
  return CurvatureBounds{mu, kappa, L};
}

// ---------------------------------------------------------------------------

PriceProcess PriceProcess::series(std::vector<double> log_returns) {
  PriceProcess p;
  p.kind = Kind::Series;
  p.log_returns = std::move(log_returns);
  return p;
}

PriceProcess PriceProcess::walk(double sigma, std::uint64_t seed) {
  require(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::InvalidArgument, "walk sigma must be nonnegative");
  PriceProcess p;
  p.kind = Kind::MultiplicativeWalk;
  p.sigma = sigma;
  p.seed = seed;
  return p;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

// Executes a fee-less trade on the mirrored pool and maps the reserves back,
// keeping the original kind parameters bit-for-bit.
PoolState trade_mirrored(const PoolState& pool, double mirrored_delta) {
  const PoolState after = execute_feeless(pool.swapped(), mirrored_delta).after;
  return pool.with_reserves(after.reserve_numeraire(), after.reserve_traded());
}

}  // namespace

PoolState move_to_price(const PoolState& pool, double price) {
  require(std::isfinite(price) && price > 0.0, ErrorKind::InvalidArgument, "price must be positive");
  const double g0 = spot_price(pool);
  if (price == g0) return pool;
  if (price < g0) return execute_feeless(pool, -no_arb_infinite(PriceImpactFn::from_pool(pool), price)).after;
  const PoolState mirror = pool.swapped();
  return trade_mirrored(pool, -no_arb_infinite(PriceImpactFn::from_pool(mirror), 1.0 / price));
}

std::vector<TrajectoryRow> simulate_rounds(const PoolState& external, const PoolState& secondary,
                                           const PriceProcess& process, int rounds) {
  require(rounds >= 0, ErrorKind::InvalidArgument, "round count must be nonnegative");
  std::mt19937_64 rng(process.seed);
  PoolState ext = external.with_fee(1.0);
  PoolState sec = secondary.with_fee(1.0);
  std::vector<TrajectoryRow> rows;
  rows.reserve(static_cast<std::size_t>(rounds));
  for (int t = 1; t <= rounds; ++t) {
    double shock = 0.0;
    if (process.kind == PriceProcess::Kind::Series) {
      if (static_cast<std::size_t>(t - 1) < process.log_returns.size()) shock = process.log_returns[t - 1];
    } else {
      shock = process.sigma * (2.0 * unit_uniform(rng()) - 1.0);
    }
    try {
      if (shock != 0.0) ext = move_to_price(ext, spot_price(ext) * std::exp(shock));

      TrajectoryRow row;
      row.round = t;
      row.m0_e = spot_price(ext);
      row.m0_s = spot_price(sec);
      const double r_before = sec.reserve_traded();
      if (row.m0_e <= row.m0_s) {
        const MarketPair pair = make_pair(PriceImpactFn::from_pool(ext), PriceImpactFn::from_pool(sec));
        const CurvatureBounds cert = certify_pair(pair);
        const NoArbResult res = no_arb_pair(pair, cert.mu, cert.kappa);
        ext = execute_feeless(ext, res.delta_star).after;
        sec = execute_feeless(sec, -res.delta_star).after;
        row.m_a = res.m_a;
        row.bound = res.bound;
      } else {
        const MarketPair pair = make_pair(PriceImpactFn::from_pool(ext.swapped()), PriceImpactFn::from_pool(sec.swapped()));
        const CurvatureBounds cert = certify_pair(pair);
        const NoArbResult res = no_arb_pair(pair, cert.mu, cert.kappa);
        ext = trade_mirrored(ext, res.delta_star);
        sec = trade_mirrored(sec, -res.delta_star);
        row.m_a = 1.0 / res.m_a;
        row.bound = unmirror_bound(row.m0_s, res.bound);
      }
      row.delta_star = sec.reserve_traded() - r_before;
      row.pv_lp = portfolio_value(sec, row.m_a);
      rows.push_back(row);
    } catch (const Error& e) {
      fail(e.kind(), "round " + std::to_string(t) + ": " + e.what());
    }
  }
  return rows;
}

void to_json(nlohmann::json& j, const NoArbResult& r) {
  j = nlohmann::json{{"delta_star", r.delta_star},
                     {"m_a", r.m_a},
                     {"price_move", r.price_move},
                     {"bound", r.bound},
                     {"overshoot_delta", r.overshoot_delta}};
}

}  // namespace cfmm
