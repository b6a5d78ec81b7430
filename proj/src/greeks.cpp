#include "cfmm/greeks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "cfmm/arbitrage.hpp"
#include "cfmm/error.hpp"

namespace cfmm {

double price_slope(const CfmmKind& kind, double x, double y) {
  const Partials p = trading_partials(kind, x, y);
  const double m = p.dx / p.dy;
  const double m_x = (p.dxx * p.dy - p.dx * p.dxy) / (p.dy * p.dy);
  const double m_y = (p.dxy * p.dy - p.dx * p.dyy) / (p.dy * p.dy);
  return m_x - m * m_y;
}

GreeksReport greeks_two_asset(const PoolState& pool, double m) {
  require(std::isfinite(m) && m > 0.0, ErrorKind::InvalidArgument, "price must be positive");
  const PoolState base = pool.with_fee(1.0);
  if (std::holds_alternative<ConstantSum>(base.kind())) {
    const double fixed = spot_price(base);
    require(std::abs(m - fixed) <= 1e-12 * fixed, ErrorKind::OutOfRange,
            "a constant sum pool only quotes " + std::to_string(fixed));
    fail(ErrorKind::NotDifferentiable, "a constant sum pool cannot move its price, so dR/dm does not exist");
  }
  const PoolState at = move_to_price(base, m);

  GreeksReport r;
  r.price = m;
  r.reserve_traded = at.reserve_traded();
  r.reserve_numeraire = at.reserve_numeraire();
  r.p_v = m * r.reserve_traded + r.reserve_numeraire;
  r.p_delta = r.reserve_traded;
  if (std::holds_alternative<ConstantProduct>(base.kind())) {
    const double k = base.reserve_traded() * base.reserve_numeraire();
    r.p_gamma = -0.5 * std::sqrt(k) * std::pow(m, -1.5);
  } else {
    const double slope = price_slope(at.kind(), r.reserve_traded, r.reserve_numeraire);
    require(slope < 0.0 && std::isfinite(slope), ErrorKind::NotDifferentiable,
            "the price does not move with the reserves at this state");
    r.p_gamma = 1.0 / slope;
  }
  r.d_numeraire_dm = -m * r.p_gamma;
  return r;
}

// ---------------------------------------------------------------------------
// n assets

std::vector<double> NAssetInvariant::grad(const std::vector<double>& r) const {
  if (gradient) return gradient(r);
  std::vector<double> g(r.size());
  std::vector<double> probe = r;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double h = 1e-6 * std::max(std::abs(r[i]), 1e-12);
    probe[i] = r[i] + h;
    const double up = value(probe);
    probe[i] = r[i] - h;
    const double down = value(probe);
    probe[i] = r[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

std::vector<double> prices_at(const NAssetInvariant& psi, const std::vector<double>& r, std::size_t numeraire) {
  std::vector<double> g = psi.grad(r);
  require(g[numeraire] != 0.0 && std::isfinite(g[numeraire]), ErrorKind::SingularJacobian,
          "the numeraire partial vanishes");
  const double denom = g[numeraire];
  for (double& v : g) v /= denom;
  return g;
}

// Price residuals for the non-numeraire coins and the relative level residual
// in the numeraire slot.
std::vector<double> residual(const NAssetInvariant& psi, const std::vector<double>& r, const std::vector<double>& target,
                             std::size_t numeraire, double level) {
  std::vector<double> f = prices_at(psi, r, numeraire);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = (f[j] - target[j]) / target[j];
  f[numeraire] = (psi.value(r) - level) / std::abs(level);
  return f;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> solve(const Eigen::MatrixXd& a, const std::vector<double>& rhs) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-13);
  require(lu.isInvertible(), ErrorKind::SingularJacobian, "the re-projection Jacobian is singular");
  const Eigen::VectorXd x = lu.solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size())));
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace

std::vector<double> n_asset_no_arb_state(const NAssetInvariant& psi, const std::vector<double>& reserves,
                                         const std::vector<double>& prices, std::size_t numeraire) {
  const std::size_t n = reserves.size();
  require(n >= 2 && prices.size() == n && numeraire < n, ErrorKind::InvalidArgument,
          "need at least two reserves, matching prices and a valid numeraire index");
  for (std::size_t j = 0; j < n; ++j) {
    require(reserves[j] > 0.0 && std::isfinite(reserves[j]), ErrorKind::InvalidArgument,
            "reserves must be positive");
    require(j == numeraire || (prices[j] > 0.0 && std::isfinite(prices[j])), ErrorKind::InvalidArgument,
            "prices must be positive");
  }
  std::vector<double> target = prices;
  target[numeraire] = 1.0;
  const double level = psi.value(reserves);
  require(level != 0.0 && std::isfinite(level), ErrorKind::InvalidArgument, "the invariant must be nonzero");

  std::vector<double> r = reserves;
  std::vector<double> f = residual(psi, r, target, numeraire, level);
  double best = max_abs(f);
  for (int iter = 0; iter < 200 && best > 1e-15; ++iter) {
    Eigen::MatrixXd jac(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 1e-6 * r[k];
      std::vector<double> up = r, down = r;
      up[k] += h;
      down[k] -= h;
      const std::vector<double> fu = residual(psi, up, target, numeraire, level);
      const std::vector<double> fd = residual(psi, down, target, numeraire, level);
      for (std::size_t i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (fu[i] - fd[i]) / (2.0 * h);
    }
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -f[i];
    std::vector<double> step = solve(jac, rhs);

    // Keep every reserve positive, then halve until the residual improves.
    double t = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (step[k] < 0.0) t = std::min(t, 0.5 * r[k] / -step[k]);
    }
    bool improved = false;
    for (int halvings = 0; halvings < 40; ++halvings, t *= 0.5) {
      std::vector<double> trial = r;
      for (std::size_t k = 0; k < n; ++k) trial[k] += t * step[k];
      const std::vector<double> ft = residual(psi, trial, target, numeraire, level);
      if (max_abs(ft) < best) {
        r = std::move(trial);
        f = ft;
        best = max_abs(ft);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  require(best <= 1e-7, ErrorKind::Diverged,
          "re-projection onto the level set stalled at residual " + std::to_string(best));
  return r;
}

NAssetGreeks greeks_n_asset(const NAssetInvariant& psi, const std::vector<double>& reserves, std::size_t numeraire,
                            double rel_step) {
  require(rel_step > 0.0 && rel_step < 0.1, ErrorKind::InvalidArgument, "relative step must lie in (0, 0.1)");
  const std::size_t n = reserves.size();
  require(n >= 2 && numeraire < n, ErrorKind::InvalidArgument, "need at least two reserves and a valid numeraire");

  NAssetGreeks out;
  out.prices = prices_at(psi, reserves, numeraire);
  out.sensitivity.assign(n, std::vector<double>(n, 0.0));
  out.p_delta.assign(n, 0.0);
  out.p_delta_cross.assign(n, 0.0);
  out.p_gamma.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    if (i == numeraire) {
      out.p_delta[i] = reserves[i];
      out.p_delta_cross[i] = reserves[i];
      continue;
    }
    const double h = rel_step * out.prices[i];
    std::vector<double> up = out.prices, down = out.prices;
    up[i] += h;
    down[i] -= h;
    const std::vector<double> r_up = n_asset_no_arb_state(psi, reserves, up, numeraire);
    const std::vector<double> r_down = n_asset_no_arb_state(psi, reserves, down, numeraire);
    double envelope = 0.0;
    double cross = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (r_up[j] - r_down[j]) / (2.0 * h);
      out.sensitivity[i][j] = d;
      envelope += out.prices[j] * d;
      if (j != i) cross += (out.prices[j] - 1.0) * d;
    }
    out.p_delta[i] = reserves[i] + envelope;
    out.p_delta_cross[i] = reserves[i] + cross;
    out.p_gamma[i] = out.sensitivity[i][i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hedging

HedgeBounds hedge_bounds(const PoolState& pool, double delta, double mu, double kappa) {
  require(delta >= 0.0 && std::isfinite(delta), ErrorKind::InvalidArgument, "sale size must be nonnegative");
  require(mu >= kappa && kappa >= 0.0, ErrorKind::InvalidArgument, "need mu >= kappa >= 0");
  const PoolState base = pool.with_fee(1.0);
  const double r_after = base.reserve_traded() + delta;
  HedgeBounds out;
  out.p_delta = r_after;
  if (std::holds_alternative<ConstantSum>(base.kind())) {
    out.holds = true;  // the price never moves, so there is nothing to hedge
    out.ddelta_dm = std::numeric_limits<double>::infinity();
    return out;
  }
  const PoolState after = execute_feeless(base, -delta).after;
  const double slope = -price_slope(after.kind(), after.reserve_traded(), after.reserve_numeraire());
  require(slope > 0.0 && std::isfinite(slope), ErrorKind::NotDifferentiable,
          "g'(-delta) is not positive at this sale size");
  out.ddelta_dm = -1.0 / slope;
  out.value_sensitivity = slope * r_after;
  out.exact = out.value_sensitivity * out.ddelta_dm;
  out.lower = mu * r_after * out.ddelta_dm;
  out.upper = kappa * r_after * out.ddelta_dm;
  const double tol = 1e-12 * std::abs(out.exact);
  out.holds = out.lower <= out.exact + tol && out.exact <= out.upper + tol;
  return out;
}

// ---------------------------------------------------------------------------
// Replication

ReplicationPortfolio carr_madan_weights(double cutoff, double epsilon, const std::vector<double>& strikes) {
  require(cutoff >= 0.0 && epsilon >= 0.0 && cutoff + epsilon > 0.0, ErrorKind::InvalidArgument,
          "need cutoff + epsilon > 0");
  require(strikes.size() >= 2, ErrorKind::InvalidArgument, "need at least two strikes");
  ReplicationPortfolio p;
  p.cutoff = cutoff;
  p.epsilon = epsilon;
  const double lo = p.lower();
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    require(strikes[i] >= lo * (1.0 - 1e-15), ErrorKind::InvalidArgument, "strikes must lie above the cutoff");
    require(i == 0 || strikes[i] > strikes[i - 1], ErrorKind::InvalidArgument, "strikes must increase");
  }
  p.strikes = strikes;
  p.weights.reserve(strikes.size());
  for (double k : strikes) p.weights.push_back(2.0 / (k * k * k));
  return p;
}

std::vector<double> uniform_strikes(double lower, double k_max, std::size_t intervals) {
  require(intervals >= 1 && k_max > lower, ErrorKind::InvalidArgument, "need k_max > lower and one interval");
  std::vector<double> k(intervals + 1);
  const double h = (k_max - lower) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) k[i] = lower + h * static_cast<double>(i);
  k.back() = k_max;
  return k;
}

double carr_madan_integral(const ReplicationPortfolio& portfolio, double F) {
  const auto& k = portfolio.strikes;
  if (F <= k.front()) return 0.0;
  require(k.back() >= F, ErrorKind::GridTooCoarse, "the strike grid ends below F");
  auto payoff = [F](double strike, double weight) { return weight * std::max(F - strike, 0.0); };
  auto density = [&](double strike) { return payoff(strike, 2.0 / (strike * strike * strike)); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k.size() && k[i] < F; ++i) {
    const double a = k[i];
    const double fa = payoff(a, portfolio.weights[i]);
    const bool split = k[i + 1] > F;
    const double b = split ? F : k[i + 1];
    const double fb = split ? 0.0 : payoff(b, portfolio.weights[i + 1]);
    total += (b - a) / 6.0 * (fa + 4.0 * density(0.5 * (a + b)) + fb);
  }
  return total;
}

CarrMadanCheck carr_madan_check(double F, double cutoff, double epsilon, double tol, std::size_t initial_intervals,
                                int max_refinements) {
  require(F > 0.0 && std::isfinite(F), ErrorKind::InvalidArgument, "F must be positive");
  require(tol > 0.0 && initial_intervals >= 1, ErrorKind::InvalidArgument, "need tol > 0 and one interval");
  const double c = cutoff + epsilon;
  CarrMadanCheck out;
  out.target = F > c ? 1.0 / F - 1.0 / c + (F - c) / (c * c) : 0.0;
  const double k_max = 10.0 * std::max(F, c);
  std::size_t n = initial_intervals;
  for (int refinement = 0; refinement <= max_refinements; ++refinement, n *= 2) {
    const ReplicationPortfolio p = carr_madan_weights(cutoff, epsilon, uniform_strikes(c, k_max, n));
    out.options_integral = carr_madan_integral(p, F);
    out.residual = std::abs(out.options_integral - out.target);
    out.intervals = n;
    if (out.residual <= tol) return out;
  }
  fail(ErrorKind::GridTooCoarse, "residual " + std::to_string(out.residual) + " above tolerance after " +
                                     std::to_string(out.intervals) + " intervals");
}

void to_json(nlohmann::json& j, const GreeksReport& r) {
  j = nlohmann::json{{"price", r.price},
                     {"p_v", r.p_v},
                     {"p_delta", r.p_delta},
                     {"p_gamma", r.p_gamma},
                     {"reserve_traded", r.reserve_traded},
                     {"reserve_numeraire", r.reserve_numeraire},
                     {"d_numeraire_dm", r.d_numeraire_dm}};
}

void to_json(nlohmann::json& j, const NAssetGreeks& r) {
  j = nlohmann::json{{"prices", r.prices},
                     {"p_delta", r.p_delta},
                     {"p_delta_cross", r.p_delta_cross},
                     {"p_gamma", r.p_gamma},
                     {"sensitivity", r.sensitivity}};
}

void to_json(nlohmann::json& j, const HedgeBounds& r) {
  j = nlohmann::json{{"lower", r.lower},       {"upper", r.upper},
                     {"exact", r.exact},       {"p_delta", r.p_delta},
                     {"value_sensitivity", r.value_sensitivity}, {"ddelta_dm", r.ddelta_dm},
                     {"holds", r.holds}};
}

void to_json(nlohmann::json& j, const CarrMadanCheck& r) {
  j = nlohmann::json{{"options_integral", r.options_integral},
                     {"target", r.target},
                     {"residual", r.residual},
                     {"intervals", r.intervals}};
}

}  // namespace cfmm
