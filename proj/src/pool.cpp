#include "cfmm/pool.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cfmm/error.hpp"
#include "cfmm/numerics.hpp"

namespace cfmm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate_kind(const CfmmKind& kind) {
  std::visit(Overloaded{
                 [](const ConstantSum&) {},
                 [](const ConstantProduct&) {},
                 [](const GeometricMean& k) {
                   require(std::isfinite(k.tau) && k.tau > 0.0 && k.tau < 1.0, ErrorKind::InvalidArgument,
                           "geometric mean weight must lie in (0, 1)");
                 },
                 [](const Curve& k) {
                   require(positive_finite(k.alpha) && positive_finite(k.beta), ErrorKind::InvalidArgument,
                           "curve parameters alpha and beta must be positive");
                 },
             },
             kind);
}

// Bracketed solve of the Curve level set for y. The residual is strictly
// increasing in y, so any seed can be widened into a bracket by doubling.
double curve_level_set(const Curve& c, double x, double level) {
  auto residual = [&](double y) { return c.alpha * (x + y) - c.beta / (x * y) - level; };
  double seed = curve_numeraire_closed_form(c.alpha, c.beta, level, x);
  if (!positive_finite(seed)) seed = 1.0;
  double lo = seed;
  double hi = seed;
  for (int i = 0; i < 2100 && residual(lo) > 0.0; ++i) lo *= 0.5;
  for (int i = 0; i < 2100 && residual(hi) < 0.0; ++i) hi *= 2.0;
  require(residual(lo) <= 0.0 && residual(hi) >= 0.0 && std::isfinite(hi), ErrorKind::NoRoot,
          "could not bracket the curve level set");
  const double y = numerics::toms748(residual, lo, hi);
  const double scale = std::max({1.0, std::abs(level), c.alpha * (x + y), c.beta / (x * y)});
  require(std::abs(residual(y)) <= 1e-12 * scale, ErrorKind::NoRoot, "curve level-set residual too large");
  return y;
}

double geometric_level_set(double tau, double x, double level) {
  return std::exp((std::log(level) - tau * std::log(x)) / (1.0 - tau));
}

void require_in_domain(const PoolState& pool, double delta) {
  const TradeDomain d = trade_domain(pool);
  require(std::isfinite(delta) && delta >= d.delta_min && delta <= d.delta_max, ErrorKind::DomainExceeded,
          "trade of size " + std::to_string(delta) + " leaves the pool domain [" + std::to_string(d.delta_min) +
              ", " + std::to_string(d.delta_max) + "]");
}

}  // namespace

std::string kind_name(const CfmmKind& kind) {
  return std::visit(Overloaded{
                        [](const ConstantSum&) { return std::string("constant_sum"); },
                        [](const ConstantProduct&) { return std::string("constant_product"); },
                        [](const GeometricMean&) { return std::string("geometric_mean"); },
                        [](const Curve&) { return std::string("curve"); },
                    },
                    kind);
}

CfmmKind swapped_kind(const CfmmKind& kind) {
  if (const auto* g = std::get_if<GeometricMean>(&kind)) return GeometricMean{1.0 - g->tau};
  return kind;
}

double trading_function(const CfmmKind& kind, double x, double y) {
  return std::visit(Overloaded{
                        [&](const ConstantSum&) { return x + y; },
                        [&](const ConstantProduct&) { return x * y; },
                        [&](const GeometricMean& g) { return std::pow(x, g.tau) * std::pow(y, 1.0 - g.tau); },
                        [&](const Curve& c) { return c.alpha * (x + y) - c.beta / (x * y); },
                    },
                    kind);
}

Partials trading_partials(const CfmmKind& kind, double x, double y) {
  return std::visit(
      Overloaded{
          [&](const ConstantSum&) { return Partials{1.0, 1.0, 0.0, 0.0, 0.0}; },
          [&](const ConstantProduct&) { return Partials{y, x, 0.0, 0.0, 1.0}; },
          [&](const GeometricMean& g) {
            const double t = g.tau;
            const double psi = std::pow(x, t) * std::pow(y, 1.0 - t);
            return Partials{t * psi / x, (1.0 - t) * psi / y, t * (t - 1.0) * psi / (x * x),
                            -t * (1.0 - t) * psi / (y * y), t * (1.0 - t) * psi / (x * y)};
          },
          [&](const Curve& c) {
            const double b = c.beta;
            return Partials{c.alpha + b / (x * x * y), c.alpha + b / (x * y * y), -2.0 * b / (x * x * x * y),
                            -2.0 * b / (x * y * y * y), -b / (x * x * y * y)};
          },
      },
      kind);
}

double curve_numeraire_closed_form(double alpha, double beta, double level, double x) {
  // alpha*y^2 + (alpha*x - level)*y - beta/x = 0, positive root.
  const double b = alpha * x - level;
  const double c = beta / x;
  const double disc = std::sqrt(b * b + 4.0 * alpha * c);
  if (b > 0.0) return 2.0 * c / (b + disc);
  return (disc - b) / (2.0 * alpha);
}

double level_set_numeraire(const CfmmKind& kind, double x, double level) {
  require(positive_finite(x), ErrorKind::DomainExceeded, "traded reserve must stay positive");
  return std::visit(Overloaded{
                        [&](const ConstantSum&) { return level - x; },
                        [&](const ConstantProduct&) { return level / x; },
                        [&](const GeometricMean& g) { return geometric_level_set(g.tau, x, level); },
                        [&](const Curve& c) { return curve_level_set(c, x, level); },
                    },
                    kind);
}

PoolState::PoolState(CfmmKind kind, double reserve_traded, double reserve_numeraire, double fee_gamma)
    : kind_(kind), reserve_traded_(reserve_traded), reserve_numeraire_(reserve_numeraire), fee_gamma_(fee_gamma) {
  validate_kind(kind_);
  require(positive_finite(reserve_traded_) && positive_finite(reserve_numeraire_), ErrorKind::InvalidArgument,
          "reserves must be positive and finite");
  require(std::isfinite(fee_gamma_) && fee_gamma_ > 0.0 && fee_gamma_ <= 1.0, ErrorKind::InvalidArgument,
          "fee gamma must lie in (0, 1]");
  require(std::isfinite(trading_function(kind_, reserve_traded_, reserve_numeraire_)), ErrorKind::InvalidArgument,
          "invariant value is not finite");
}

PoolState PoolState::with_reserves(double reserve_traded, double reserve_numeraire) const {
  return PoolState(kind_, reserve_traded, reserve_numeraire, fee_gamma_);
}

PoolState PoolState::with_kind(CfmmKind kind) const {
  return PoolState(kind, reserve_traded_, reserve_numeraire_, fee_gamma_);
}

PoolState PoolState::with_fee(double fee_gamma) const {
  return PoolState(kind_, reserve_traded_, reserve_numeraire_, fee_gamma);
}

PoolState PoolState::swapped() const {
  return PoolState(swapped_kind(kind_), reserve_numeraire_, reserve_traded_, fee_gamma_);
}

double invariant_value(const PoolState& pool) {
  return trading_function(pool.kind(), pool.reserve_traded(), pool.reserve_numeraire());
}

TradeDomain trade_domain(const PoolState& pool) {
  const double r = pool.reserve_traded();
  const double y_floor = kReserveFloor * pool.reserve_numeraire();
  const double x_ceiling = level_set_numeraire(swapped_kind(pool.kind()), y_floor, invariant_value(pool));
  const double delta_min = std::isfinite(x_ceiling) ? r - x_ceiling : -std::numeric_limits<double>::max();
  return TradeDomain{delta_min, r * (1.0 - kReserveFloor)};
}

double trade_output(const PoolState& pool, double delta) {
  if (delta == 0.0) return 0.0;
  require_in_domain(pool, delta);
  const double r = pool.reserve_traded();
  const double rp = pool.reserve_numeraire();
  return std::visit(Overloaded{
                        [&](const ConstantSum&) { return delta; },
                        [&](const ConstantProduct&) { return rp * delta / (r - delta); },
                        [&](const GeometricMean& g) {
                          const double xi = g.tau / (1.0 - g.tau);
                          return rp * std::expm1(-xi * std::log1p(-delta / r));
                        },
                        [&](const Curve&) {
                          return level_set_numeraire(pool.kind(), r - delta, invariant_value(pool)) - rp;
                        },
                    },
                    pool.kind());
}

double marginal_price(const PoolState& pool, double delta) {
  if (delta != 0.0) require_in_domain(pool, delta);
  const double r = pool.reserve_traded();
  const double rp = pool.reserve_numeraire();
  const double x = r - delta;
  return std::visit(Overloaded{
                        [&](const ConstantSum&) { return 1.0; },
                        [&](const ConstantProduct&) { return (rp / r) * (r / x) * (r / x); },
                        [&](const GeometricMean& g) {
                          const double xi = g.tau / (1.0 - g.tau);
                          return xi * (rp / r) * std::pow(r / x, 1.0 + xi);
                        },
                        [&](const Curve&) {
                          const double y =
                              delta == 0.0 ? rp : level_set_numeraire(pool.kind(), x, invariant_value(pool));
                          const Partials p = trading_partials(pool.kind(), x, y);
                          return p.dx / p.dy;
                        },
                    },
                    pool.kind());
}

double marginal_price_with_fee(const PoolState& pool, double delta) {
  require(delta <= 0.0, ErrorKind::InvalidArgument, "fee-adjusted price is defined for sales into the pool");
  const double gamma = pool.fee_gamma();
  return gamma * marginal_price(pool, gamma * delta);
}

double portfolio_value(const PoolState& pool, double price) {
  return price * pool.reserve_traded() + pool.reserve_numeraire();
}

double min_portfolio_value(const PoolState& pool, double c_traded, double c_numeraire) {
  require(c_traded >= 0.0 && c_numeraire >= 0.0, ErrorKind::InvalidArgument, "cost vector must be nonnegative");
  const double level = invariant_value(pool);
  if (std::holds_alternative<ConstantSum>(pool.kind())) return std::min(c_traded, c_numeraire) * level;
  const TradeDomain d = trade_domain(pool);
  const double r = pool.reserve_traded();
  auto value = [&](double log_x) {
    const double x = std::exp(log_x);
    return -(c_traded * x + c_numeraire * level_set_numeraire(pool.kind(), x, level));
  };
  const auto best = numerics::golden_section_max(value, std::log(r - d.delta_max), std::log(r - d.delta_min), 1e-14);
  return -best.value;
}

TradeExecution execute_trade(const PoolState& pool, double delta) {
  const double gamma = pool.fee_gamma();
  double delta_prime = 0.0;
  if (delta < 0.0) {
    delta_prime = trade_output(pool, gamma * delta);
  } else if (delta > 0.0) {
    // A purchase is a sale of numeraire into the mirrored pool; charging the
    // fee on that input is the same as grossing up the fee-less payment.
    delta_prime = trade_output(pool, delta) / gamma;
  }
  return TradeExecution{
      pool.with_reserves(pool.reserve_traded() - delta, pool.reserve_numeraire() + delta_prime), delta,
      delta_prime};
}

TradeExecution execute_feeless(const PoolState& pool, double delta) {
  const double delta_prime = trade_output(pool, delta);
  return TradeExecution{
      pool.with_reserves(pool.reserve_traded() - delta, pool.reserve_numeraire() + delta_prime), delta,
      delta_prime};
}

void to_json(nlohmann::json& j, const PoolState& pool) {
  nlohmann::json params = nlohmann::json::object();
  if (const auto* g = std::get_if<GeometricMean>(&pool.kind())) params["tau"] = g->tau;
  if (const auto* c = std::get_if<Curve>(&pool.kind())) {
    params["alpha"] = c->alpha;
    params["beta"] = c->beta;
  }
  j = nlohmann::json{{"kind", kind_name(pool.kind())},
                     {"params", params},
                     {"reserve_traded", pool.reserve_traded()},
                     {"reserve_numeraire", pool.reserve_numeraire()},
                     {"fee_gamma", pool.fee_gamma()}};
}

namespace {

double number_field(const nlohmann::json& j, const char* name, const std::string& path) {
  require(j.is_object() && j.contains(name) && j.at(name).is_number(), ErrorKind::ConfigError,
          path + "." + name + " must be a number");
  return j.at(name).get<double>();
}

}  // namespace

PoolState pool_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::ConfigError, "pool must be a JSON object");
  require(j.contains("kind") && j.at("kind").is_string(), ErrorKind::ConfigError, "pool.kind must be a string");
  const std::string name = j.at("kind").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  CfmmKind kind;
  if (name == "constant_sum") {
    kind = ConstantSum{};
  } else if (name == "constant_product") {
    kind = ConstantProduct{};
  } else if (name == "geometric_mean") {
    kind = GeometricMean{number_field(params, "tau", "pool.params")};
  } else if (name == "curve") {
    kind = Curve{number_field(params, "alpha", "pool.params"), number_field(params, "beta", "pool.params")};
  } else {
    fail(ErrorKind::ConfigError, "pool.kind '" + name + "' is not a known trading function");
  }
  const double gamma = j.contains("fee_gamma") ? number_field(j, "fee_gamma", "pool") : 1.0;
  try {
    return PoolState(kind, number_field(j, "reserve_traded", "pool"), number_field(j, "reserve_numeraire", "pool"),
                     gamma);
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, std::string("pool: ") + e.what());
  }
}

}  // namespace cfmm
