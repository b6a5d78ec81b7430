#include "cfmm/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfmm/error.hpp"
#include "cfmm/numerics.hpp"

namespace cfmm {

using numerics::kEps;
using numerics::kInf;

bool CurvatureBounds::is_global() const { return std::isinf(interval_L); }

namespace {

double peg_mu_curve(const Curve& c, double portfolio_value) {
  const double pv = portfolio_value;
  return 32.0 * c.beta / (8.0 * c.beta * pv + c.alpha * pv * pv * pv * pv);
}

// Secant slope from zero on the requested side.
double secant(const PriceImpactFn& g, double g0, double delta, Side side) {
  return side == Side::Sell ? (g0 - g(-delta)) / delta : (g(delta) - g0) / delta;
}

double side_limit(const PriceImpactFn& g, Side side) {
  return side == Side::Sell ? -g.delta_min() : g.delta_max();
}

}  // namespace

CurvatureBounds mu_closed_form(const PoolState& pool) {
  const double r = pool.reserve_traded();
  const double g0 = spot_price(pool);
  if (std::holds_alternative<ConstantSum>(pool.kind())) return {0.0, 0.0, -trade_domain(pool).delta_min};
  if (std::holds_alternative<ConstantProduct>(pool.kind())) return {2.0 * g0 / r, 0.0, kInf};
  if (const auto* gm = std::get_if<GeometricMean>(&pool.kind())) {
    const double xi = gm->tau / (1.0 - gm->tau);
    return {(1.0 + xi) * g0 / r, 0.0, kInf};
  }
  const auto& c = std::get<Curve>(pool.kind());
  require(std::abs(g0 - 1.0) <= 1e-9, ErrorKind::PegRequired,
          "the Curve closed form needs a pool at peg, g(0) = " + std::to_string(g0));
  const double mu = peg_mu_curve(c, portfolio_value(pool, g0));
  return {mu, 0.0, mu_validity_interval(PriceImpactFn::from_pool(pool), mu)};
}

CurvatureBounds mu_estimate(const PoolState& pool) {
  try {
    return mu_closed_form(pool);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PegRequired) throw;
  }
  const auto g = PriceImpactFn::from_pool(pool);
  const double mu = mu_numeric(g);
  return {mu, 0.0, mu_validity_interval(g, mu)};
}

CurvatureBounds kappa_closed_form(const PoolState& pool, double L) {
  require(std::isfinite(L) && L > 0.0, ErrorKind::InvalidArgument, "interval L must be positive and finite");
  const TradeDomain d = trade_domain(pool);
  require(-L >= d.delta_min, ErrorKind::DomainExceeded, "interval L exceeds the sell-side trade domain");
  const double r = pool.reserve_traded();
  const double g0 = spot_price(pool);
  double kappa = 0.0;
  if (std::holds_alternative<ConstantSum>(pool.kind())) {
    kappa = 0.0;
  } else if (std::holds_alternative<ConstantProduct>(pool.kind())) {
    kappa = -(g0 / L) * std::expm1(-2.0 * std::log1p(L / r));
  } else if (const auto* gm = std::get_if<GeometricMean>(&pool.kind())) {
    const double xi = gm->tau / (1.0 - gm->tau);
    kappa = -(g0 / L) * std::expm1(-(1.0 + xi) * std::log1p(L / r));
  } else {
    kappa = (g0 - marginal_price(pool, -L)) / L;
  }
  return {0.0, kappa, L};
}

double mu_numeric(const PriceImpactFn& g) {
  const double sell_room = -g.delta_min();
  require(sell_room > 0.0, ErrorKind::InvalidArgument, "price impact has no sell-side domain");
  const double scale = g.scale();
  const double h = std::min(std::max(1e-7, 1e-7 * scale), 0.25 * sell_room);
  const double estimate = numerics::richardson_one_sided([&](double t) { return g(t); }, 0.0, h, -1);

  // Local convexity scan: slopes of consecutive chords just below zero must
  // not decrease. Chords of several widths are compared so that a gentle
  // bend is not lost in the roundoff of the narrowest chords.
  const double window = std::min(1e-3 * scale, sell_room);
  constexpr int kSegments = 32;
  const double step = window / kSegments;
  std::vector<double> values(kSegments + 1);
  for (int i = 0; i <= kSegments; ++i) values[i] = g(-window + i * step);
  const double g_mag = std::max(std::abs(values.front()), std::abs(values.back()));
  for (int span = 1; span <= kSegments / 2; span *= 2) {
    const double width = span * step;
    double prev = -numerics::kInf;
    double max_slope = 0.0;
    for (int i = 0; i + span <= kSegments; i += span) {
      max_slope = std::max(max_slope, std::abs(values[i + span] - values[i]) / width);
    }
    const double tol = 1e-9 * max_slope + 16.0 * kEps * g_mag / width;
    for (int i = 0; i + span <= kSegments; i += span) {
      const double slope = (values[i + span] - values[i]) / width;
      require(slope >= prev - tol, ErrorKind::NonConvexDetected,
              "chord slopes decrease near zero, so g'(0) does not bound the price drop");
      prev = slope;
    }
  }
  return std::max(0.0, estimate);
}

double kappa_numeric(const PriceImpactFn& g, double L) {
  require(std::isfinite(L) && L > 0.0, ErrorKind::InvalidArgument, "interval L must be positive and finite");
  return (g(0.0) - g(-L)) / L;
}

CurvatureBounds certify_bounds(const PriceImpactFn& g, double L, Side side, std::size_t samples) {
  require(std::isfinite(L) && L > 0.0, ErrorKind::InvalidArgument, "interval L must be positive and finite");
  require(L <= side_limit(g, side), ErrorKind::DomainExceeded, "interval L exceeds the trade domain");
  require(samples >= 2, ErrorKind::InvalidArgument, "need at least two samples");
  const double g0 = g(0.0);
  std::vector<double> grid;
  grid.reserve(samples + samples / 4 + 2);
  for (std::size_t i = 1; i <= samples; ++i) grid.push_back(L * static_cast<double>(i) / samples);
  const std::size_t n_log = std::max<std::size_t>(8, samples / 4);
  for (std::size_t i = 0; i < n_log; ++i) {
    grid.push_back(L * std::pow(10.0, -6.0 + 6.0 * static_cast<double>(i) / n_log));
  }
  std::sort(grid.begin(), grid.end());

  std::size_t i_max = 0;
  std::size_t i_min = 0;
  std::vector<double> s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s[i] = secant(g, g0, grid[i], side);
    if (s[i] > s[i_max]) i_max = i;
    if (s[i] < s[i_min]) i_min = i;
  }
  auto refine = [&](std::size_t i, double sign) {
    const double lo = i == 0 ? grid[0] * 0.5 : grid[i - 1];
    const double hi = i + 1 == grid.size() ? grid[i] : grid[i + 1];
    const auto best = numerics::golden_section_max([&](double d) { return sign * secant(g, g0, d, side); }, lo,
                                                   hi, 1e-10);
    return std::max(sign * s[i], best.value) * sign;
  };
  // The secant slope tends to the one-sided derivative as delta -> 0, which
  // the grid never reaches; include that limit as a candidate.
  const double h = std::min(std::max(1e-7, 1e-7 * g.scale()), 1e-3 * L);
  const double slope0 = numerics::richardson_one_sided([&](double t) { return g(t); }, 0.0, h, side == Side::Sell ? -1 : +1);
  const double mu = std::max(refine(i_max, +1.0), slope0);
  const double kappa = std::min(refine(i_min, -1.0), slope0);
  return {std::max(0.0, mu), std::max(0.0, kappa), L};
}

double mu_validity_interval(const PriceImpactFn& g, double mu) {
  const double limit = -g.delta_min();
  if (!(limit > 0.0)) return 0.0;
  const double g0 = g(0.0);
  auto violated = [&](double d) { return g0 - g(-d) > mu * d * (1.0 + 1e-9) + 16.0 * kEps * g0; };
  const double cap = std::min(limit, 1e6 * g.scale());
  const double start = std::min(1e-6 * g.scale(), 0.5 * cap);
  constexpr int kPoints = 400;
  const double ratio = std::pow(cap / start, 1.0 / kPoints);
  double ok = 0.0;
  double d = start;
  for (int i = 0; i <= kPoints; ++i, d *= ratio) {
    const double at = std::min(d, cap);
    if (violated(at)) {
      double lo = ok;
      double hi = at;
      for (int k = 0; k < 100 && hi - lo > 1e-12 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (violated(mid) ? hi : lo) = mid;
      }
      return lo;
    }
    ok = at;
  }
  return cap < limit ? cap : kInf;
}

StabilityReport verify_stability(const PriceImpactFn& g, const CurvatureBounds& bounds, std::size_t samples) {
  require(samples >= 2, ErrorKind::InvalidArgument, "need at least two samples");
  const double limit = -g.delta_min();
  double L = bounds.interval_L;
  if (!std::isfinite(L)) L = std::min(limit, 1e3 * g.scale());
  L = std::min(L, limit);
  StabilityReport report;
  report.samples = samples;
  report.interval = L;
  const double g0 = g(0.0);
  const double tol = 1e-12 * std::max(1.0, std::abs(g0));
  report.min_upper_slack = kInf;
  report.min_lower_slack = kInf;
  double prev_secant = -kInf;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double d = L * static_cast<double>(i) / samples;
    const double drop = g0 - g(-d);
    const double upper = bounds.mu * d - drop;
    const double lower = drop - bounds.kappa * d;
    if (upper < report.min_upper_slack) {
      report.min_upper_slack = upper;
      report.min_upper_slack_at = d;
    }
    if (lower < report.min_lower_slack) {
      report.min_lower_slack = lower;
      report.min_lower_slack_at = d;
    }
    const double sec = drop / d;
    if (sec < prev_secant - 1e-9 * std::abs(prev_secant) - 16.0 * kEps * std::abs(g0) / d) {
      report.nonconvex_warning = true;
    }
    prev_secant = sec;
  }
  report.pass = report.min_upper_slack >= -tol && report.min_lower_slack >= -tol;
  return report;
}

double gaussian_curvature(const PoolState& pool, double delta, double delta_prime) {
  const double x = pool.reserve_traded() - delta;
  const double y = pool.reserve_numeraire() + delta_prime;
  require(x > 0.0 && y > 0.0, ErrorKind::DomainExceeded, "curvature evaluated at nonpositive reserves");
  const Partials p = trading_partials(pool.kind(), x, y);
  // In trade coordinates: psi_d = -Psi_x, psi_d' = Psi_y, psi_dd = Psi_xx,
  // psi_d'd' = Psi_yy, psi_dd' = -Psi_xy.
  const double fd = -p.dx;
  const double fe = p.dy;
  const double numerator = fe * fe * p.dxx - 2.0 * fd * fe * (-p.dxy) + fd * fd * p.dyy;
  const double norm = fd * fd + fe * fe;
  return -numerator / (norm * std::sqrt(norm));
}

ConvexityCheck curve_convexity_check(const PoolState& pool, double delta, double delta_prime) {
  const auto* c = std::get_if<Curve>(&pool.kind());
  require(c != nullptr, ErrorKind::InvalidArgument, "convexity check applies to Curve pools");
  const double x = pool.reserve_traded() - delta;
  const double y = pool.reserve_numeraire() + delta_prime;
  ConvexityCheck out;
  out.a = c->alpha * x * x * y;
  out.b = c->alpha * x * y * y;
  out.a_margin = out.a - c->beta;
  out.b_margin = out.b - c->alpha;
  out.reserve_product = x * y;
  out.reserve_condition = x > 0.0 && y > 0.0 && x * y > 1.0;
  out.holds = x > 0.0 && y > 0.0 && out.a_margin > 0.0 && out.b_margin > 0.0;
  return out;
}

namespace {

nlohmann::json interval_json(double L) {
  if (std::isinf(L)) return "infinite";
  return L;
}

}  // namespace

void to_json(nlohmann::json& j, const CurvatureBounds& b) {
  j = nlohmann::json{{"mu", b.mu}, {"kappa", b.kappa}, {"interval_L", interval_json(b.interval_L)}};
}

void to_json(nlohmann::json& j, const StabilityReport& r) {
  j = nlohmann::json{{"pass", r.pass},
                     {"samples", r.samples},
                     {"interval", r.interval},
                     {"min_upper_slack", r.min_upper_slack},
                     {"min_upper_slack_at", r.min_upper_slack_at},
                     {"min_lower_slack", r.min_lower_slack},
                     {"min_lower_slack_at", r.min_lower_slack_at},
                     {"nonconvex_warning", r.nonconvex_warning}};
}

}  // namespace cfmm
