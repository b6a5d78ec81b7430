#include "cfmm/price_impact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cfmm/error.hpp"
#include "cfmm/numerics.hpp"

namespace cfmm {

PriceImpactFn::PriceImpactFn(Eval eval, double delta_min, double delta_max, double scale,
                             std::optional<PoolState> pool)
    : eval_(std::move(eval)), delta_min_(delta_min), delta_max_(delta_max), scale_(scale), pool_(std::move(pool)) {
  require(delta_min_ <= 0.0 && delta_max_ >= 0.0, ErrorKind::InvalidArgument,
          "price impact domain must contain the null trade");
  require(std::isfinite(scale_) && scale_ > 0.0, ErrorKind::InvalidArgument, "scale must be positive");
}

PriceImpactFn PriceImpactFn::from_pool(const PoolState& pool) {
  const TradeDomain d = trade_domain(pool);
  return PriceImpactFn([pool](double delta) { return marginal_price(pool, delta); }, d.delta_min, d.delta_max,
                       pool.reserve_traded(), pool);
}

PriceImpactFn PriceImpactFn::constant(double price, double delta_min, double delta_max) {
  require(std::isfinite(price) && price > 0.0, ErrorKind::InvalidArgument, "price must be positive");
  return PriceImpactFn([price](double) { return price; }, delta_min, delta_max, 1.0, std::nullopt);
}

PriceImpactFn PriceImpactFn::from_table(std::vector<std::pair<double, double>> knots) {
  std::sort(knots.begin(), knots.end());
  require(knots.size() >= 2, ErrorKind::InvalidArgument, "a price table needs at least two rows");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(std::isfinite(knots[i].first) && std::isfinite(knots[i].second) && knots[i].second > 0.0,
            ErrorKind::InvalidArgument, "price table entries must be finite with positive prices");
    if (i > 0) {
      require(knots[i].first > knots[i - 1].first, ErrorKind::InvalidArgument, "duplicate delta in price table");
      require(knots[i].second >= knots[i - 1].second, ErrorKind::InvalidArgument,
              "price table must be nondecreasing in delta");
    }
  }
  const double lo = knots.front().first;
  const double hi = knots.back().first;
  const double scale = std::max(std::abs(lo), std::abs(hi));
  auto eval = [knots = std::move(knots)](double delta) {
    auto it = std::upper_bound(knots.begin(), knots.end(), delta,
                               [](double d, const std::pair<double, double>& k) { return d < k.first; });
    if (it == knots.begin()) return knots.front().second;
    if (it == knots.end()) return knots.back().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    const double t = (delta - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
  };
  return PriceImpactFn(std::move(eval), lo, hi, scale, std::nullopt);
}

PriceImpactFn PriceImpactFn::from_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::InvalidArgument, "empty price table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "delta,price", ErrorKind::InvalidArgument, "price table header must be 'delta,price'");
  std::vector<std::pair<double, double>> knots;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    double delta = 0.0;
    double price = 0.0;
    char comma = 0;
    row >> delta >> comma >> price;
    require(!row.fail() && comma == ',', ErrorKind::InvalidArgument, "malformed price table row: " + line);
    knots.emplace_back(delta, price);
  }
  return from_table(std::move(knots));
}

PriceImpactFn PriceImpactFn::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidArgument, "cannot open price table " + path);
  return from_csv(in);
}

PriceImpactFn PriceImpactFn::from_function(Eval eval, double delta_min, double delta_max, double scale) {
  return PriceImpactFn(std::move(eval), delta_min, delta_max, scale, std::nullopt);
}

PriceImpactFn PriceImpactFn::with_quantity(Eval quantity) const {
  PriceImpactFn out = *this;
  out.quantity_ = std::move(quantity);
  return out;
}

double PriceImpactFn::operator()(double delta) const {
  require(delta >= delta_min_ && delta <= delta_max_, ErrorKind::DomainExceeded,
          "price impact evaluated outside its domain");
  return eval_(delta);
}

double quantity_fn(const PriceImpactFn& g, double delta, double abs_tol) {
  if (delta == 0.0) return 0.0;
  require(delta >= g.delta_min() && delta <= g.delta_max(), ErrorKind::DomainExceeded,
          "quantity function evaluated outside the price impact domain");
  if (g.exact_quantity()) return g.exact_quantity()(delta);
  auto eval = [&](double t) { return g(t); };
  // A coarse composite rule sets the scale so that integrals reaching towards
  // a singular domain end are resolved to relative rather than absolute accuracy.
  constexpr int kPanels = 32;
  const double h = delta / kPanels;
  double coarse = eval(0.0) + eval(delta);
  for (int i = 1; i < kPanels; ++i) coarse += (i % 2 ? 4.0 : 2.0) * eval(i * h);
  coarse *= h / 3.0;
  return numerics::adaptive_simpson(eval, 0.0, delta, std::max(abs_tol, 1e-14 * std::abs(coarse)));
}

}  // namespace cfmm
