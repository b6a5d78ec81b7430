#pragma once

// A price impact function g: signed trade size -> marginal price, together
// with the interval of trade sizes on which it may be evaluated.

#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfmm/pool.hpp"

namespace cfmm {

class PriceImpactFn {
 public:
  using Eval = std::function<double(double)>;

  // Fee-less g of a pool. Keeps the pool so that callers can reach its
  // closed forms and its mirrored form.
  static PriceImpactFn from_pool(const PoolState& pool);

  // g(delta) = price everywhere on [delta_min, delta_max].
  static PriceImpactFn constant(double price, double delta_min = -1e12, double delta_max = 1e12);

  // Piecewise-linear interpolation through (delta, price) knots. The knots
  // must be strictly increasing in delta with nondecreasing positive prices.
  static PriceImpactFn from_table(std::vector<std::pair<double, double>> knots);

  // Reads a table from CSV with a `delta,price` header.
  static PriceImpactFn from_csv(std::istream& in);
  static PriceImpactFn from_csv_file(const std::string& path);

  // Arbitrary closure. `scale` is the typical trade size, used to size
  // finite-difference steps and search windows.
  static PriceImpactFn from_function(Eval eval, double delta_min, double delta_max, double scale);

  // Evaluates g, raising DomainExceeded outside [delta_min, delta_max].
  double operator()(double delta) const;

  double delta_min() const noexcept { return delta_min_; }
  double delta_max() const noexcept { return delta_max_; }
  double scale() const noexcept { return scale_; }
  const std::optional<PoolState>& pool() const noexcept { return pool_; }

  // Attaches an exact quantity function, used by quantity_fn in place of
  // quadrature.
  PriceImpactFn with_quantity(Eval quantity) const;
  const Eval& exact_quantity() const noexcept { return quantity_; }

 private:
  PriceImpactFn(Eval eval, double delta_min, double delta_max, double scale, std::optional<PoolState> pool);

  Eval eval_;
  double delta_min_;
  double delta_max_;
  double scale_;
  std::optional<PoolState> pool_;
  Eval quantity_;
};

// q(delta) = integral of g from 0 to delta.
double quantity_fn(const PriceImpactFn& g, double delta, double abs_tol = 1e-11);

}  // namespace cfmm
