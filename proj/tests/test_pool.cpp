#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cfmm/error.hpp"
#include "cfmm/pool.hpp"
#include "cfmm/price_impact.hpp"
#include "test_support.hpp"

using namespace cfmm;

TEST(InvariantValue, WorkedExamples) {
  EXPECT_DOUBLE_EQ(invariant_value(PoolState(ConstantProduct{}, 100, 100)), 10000.0);
  EXPECT_DOUBLE_EQ(invariant_value(PoolState(ConstantSum{}, 3, 7)), 10.0);
  EXPECT_NEAR(invariant_value(PoolState(Curve{1, 10}, 10, 10)), 19.9, 1e-13);
  EXPECT_NEAR(invariant_value(PoolState(GeometricMean{0.8}, 100, 25)), std::pow(100, 0.8) * std::pow(25, 0.2),
              1e-12);
}

TEST(TradeOutput, WorkedExamples) {
  const PoolState product(ConstantProduct{}, 100, 100);
  EXPECT_NEAR(trade_output(product, 10), 10000.0 / 90.0 - 100.0, 1e-12);
  EXPECT_EQ(trade_output(product, 0), 0.0);
  EXPECT_EQ(trade_output(PoolState(Curve{1, 10}, 10, 10), 0), 0.0);
  EXPECT_DOUBLE_EQ(trade_output(PoolState(ConstantSum{}, 100, 100), 10), 10.0);
}

TEST(TradeOutput, ProductAgreesWithCurveRootFinderOnGenericLevelSet) {
  // The closed form must match a bracketed root of the invariant.
  const PoolState product(ConstantProduct{}, 100, 100);
  for (double delta : {-50.0, -3.0, 0.5, 10.0, 80.0}) {
    const double x = 100 - delta;
    const double root = test::bisect_increasing([&](double y) { return x * y - 10000.0; }, 1e-9, 1e9);
    EXPECT_NEAR(trade_output(product, delta), root - 100.0, 1e-9) << delta;
  }
}

TEST(TradeOutput, CurveMatchesCorrectedQuadraticRoot) {
  const PoolState pool(Curve{1, 10}, 10, 10);
  const double k = invariant_value(pool);
  for (double delta : {-9.0, -1.0, -1e-3, 1e-3, 1.0, 5.0, 9.0}) {
    const double y = curve_numeraire_closed_form(1, 10, k, 10 - delta);
    EXPECT_NEAR(trade_output(pool, delta), y - 10.0, 1e-11 * std::max(1.0, y)) << delta;
  }
}

TEST(TradeOutput, DrainingTheReservesIsRejected) {
  const PoolState pool(ConstantProduct{}, 100, 100);
  try {
    trade_output(pool, 100.0);
    FAIL() << "expected DomainExceeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainExceeded);
  }
  EXPECT_THROW(trade_output(PoolState(ConstantSum{}, 100, 100), -100.5), Error);
  EXPECT_NO_THROW(trade_output(pool, 99.0));
}

TEST(MarginalPrice, WorkedExamples) {
  const PoolState product(ConstantProduct{}, 100, 100);
  EXPECT_DOUBLE_EQ(marginal_price(product, 0), 1.0);
  EXPECT_NEAR(marginal_price(product, -10), 10000.0 / (110.0 * 110.0), 1e-15);
  EXPECT_NEAR(marginal_price(PoolState(GeometricMean{0.5}, 100, 100), -10), 10000.0 / (110.0 * 110.0), 1e-15);
  EXPECT_DOUBLE_EQ(marginal_price(PoolState(ConstantSum{}, 3, 7), 2.0), 1.0);
}

TEST(MarginalPrice, GeometricMeanClosedFormInWeightParametrisation) {
  // xi * k^(xi/tau) / (R - delta)^(1 + xi) with k the invariant value.
  const double tau = 0.8;
  const PoolState pool(GeometricMean{tau}, 100, 25);
  const double xi = tau / (1 - tau);
  const double k = invariant_value(pool);
  for (double delta : {-40.0, -5.0, 0.0, 7.0, 60.0}) {
    const double expected = xi * std::pow(k, xi / tau) / std::pow(100 - delta, 1 + xi);
    EXPECT_NEAR(marginal_price(pool, delta), expected, 1e-12 * expected) << delta;
  }
}

TEST(MarginalPriceWithFee, WorkedExamples) {
  const PoolState pool(ConstantProduct{}, 100, 100, 0.997);
  EXPECT_DOUBLE_EQ(marginal_price_with_fee(pool, 0), 0.997);
  EXPECT_NEAR(marginal_price_with_fee(pool, -10), 0.997 * 10000.0 / (109.97 * 109.97), 1e-14);
  EXPECT_NEAR(marginal_price_with_fee(pool, -10), 0.8244166, 5e-7);
}

TEST(MarginalPriceWithFee, MatchesFiniteDifferenceOfFeeBearingExecution) {
  const PoolState pool(ConstantProduct{}, 100, 100, 0.997);
  const double h = 1e-5;
  const double dq = (execute_trade(pool, -10 + h).delta_prime - execute_trade(pool, -10 - h).delta_prime) / (2 * h);
  EXPECT_NEAR(dq, marginal_price_with_fee(pool, -10), 1e-8);
}

TEST(MarginalPriceWithFee, RejectsPurchases) {
  EXPECT_THROW(marginal_price_with_fee(PoolState(ConstantProduct{}, 100, 100), 1.0), Error);
}

TEST(PortfolioValue, WorkedExamples) {
  EXPECT_DOUBLE_EQ(portfolio_value(PoolState(ConstantProduct{}, 100, 100), 1.0), 200.0);
  const PoolState balancer(GeometricMean{0.8}, 100, 25);
  EXPECT_NEAR(spot_price(balancer), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(portfolio_value(balancer, spot_price(balancer)), 125.0);
  EXPECT_DOUBLE_EQ(portfolio_value(PoolState(ConstantProduct{}, 100, 100), 0.9), 190.0);
}

TEST(QuantityFn, WorkedExamples) {
  EXPECT_NEAR(quantity_fn(PriceImpactFn::constant(1.0), 5.0), 5.0, 1e-12);
  const PoolState product(ConstantProduct{}, 100, 100);
  EXPECT_NEAR(quantity_fn(PriceImpactFn::from_pool(product), 10.0), 10000.0 / 90.0 - 100.0, 1e-9);
  EXPECT_EQ(quantity_fn(PriceImpactFn::from_pool(product), 0.0), 0.0);
}

TEST(QuantityFn, MatchesTradeOutputForEveryKind) {
  for (const PoolState& pool : test::reference_pools()) {
    const auto g = PriceImpactFn::from_pool(pool);
    for (double frac : {-0.3, -0.05, 0.02, 0.4}) {
      const double delta = frac * pool.reserve_traded();
      const double q = trade_output(pool, delta);
      EXPECT_NEAR(quantity_fn(g, delta), q, 1e-8 * std::max(1.0, std::abs(q))) << kind_name(pool.kind());
    }
  }
}

TEST(PoolState, RejectsInvalidParameters) {
  EXPECT_THROW(PoolState(ConstantProduct{}, 0, 1), Error);
  EXPECT_THROW(PoolState(ConstantProduct{}, 1, -1), Error);
  EXPECT_THROW(PoolState(ConstantProduct{}, 1, 1, 0.0), Error);
  EXPECT_THROW(PoolState(ConstantProduct{}, 1, 1, 1.5), Error);
  EXPECT_THROW(PoolState(GeometricMean{1.0}, 1, 1), Error);
  EXPECT_THROW(PoolState(Curve{0, 1}, 1, 1), Error);
  EXPECT_THROW(PoolState(Curve{1, -1}, 1, 1), Error);
}

TEST(PoolState, SwappedPoolQuotesReciprocalPrice) {
  for (const PoolState& pool : test::reference_pools()) {
    const PoolState s = pool.swapped();
    EXPECT_NEAR(spot_price(s) * spot_price(pool), 1.0, 1e-12) << kind_name(pool.kind());
    const PoolState back = s.swapped();
    EXPECT_DOUBLE_EQ(back.reserve_traded(), pool.reserve_traded());
    EXPECT_DOUBLE_EQ(back.reserve_numeraire(), pool.reserve_numeraire());
    EXPECT_NEAR(spot_price(back), spot_price(pool), 1e-14 * spot_price(pool));
  }
}

TEST(PoolJson, RoundTripIsLossless) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const PoolState pool = test::random_pool(rng, static_cast<test::Kind>(i % 4));
    const nlohmann::json j = pool;
    const PoolState back = pool_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back, pool);
  }
}

TEST(PoolJson, FieldNames) {
  const nlohmann::json j = PoolState(Curve{1, 10}, 10, 12, 0.997);
  EXPECT_EQ(j.at("kind"), "curve");
  EXPECT_EQ(j.at("params").at("alpha"), 1.0);
  EXPECT_EQ(j.at("params").at("beta"), 10.0);
  EXPECT_EQ(j.at("reserve_traded"), 10.0);
  EXPECT_EQ(j.at("reserve_numeraire"), 12.0);
  EXPECT_EQ(j.at("fee_gamma"), 0.997);
}

TEST(PoolJson, BadDocumentsAreConfigErrors) {
  for (const char* text : {R"({"kind":"hyperbolic","reserve_traded":1,"reserve_numeraire":1})",
                           R"({"kind":"curve","params":{"alpha":1},"reserve_traded":1,"reserve_numeraire":1})",
                           R"({"kind":"constant_product","reserve_traded":-1,"reserve_numeraire":1})",
                           R"({"kind":"constant_product","reserve_traded":"1","reserve_numeraire":1})"}) {
    try {
      pool_from_json(nlohmann::json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError) << text;
    }
  }
}

// Properties over randomized pools of every kind.

class PoolProperties : public ::testing::TestWithParam<test::Kind> {};

TEST_P(PoolProperties, TradesConserveTheInvariant) {
  std::mt19937_64 rng(101 + static_cast<int>(GetParam()));
  for (int i = 0; i < 100; ++i) {
    const PoolState pool = test::random_pool(rng, GetParam());
    const TradeDomain d = trade_domain(pool);
    const double u = test::uniform(rng, -0.9, 0.9);
    const double delta = u > 0 ? u * d.delta_max : -u * std::max(d.delta_min, -10 * pool.reserve_traded());
    const PoolState after = execute_feeless(pool, delta).after;
    // Curve's invariant is a difference of two terms that can nearly cancel,
    // so the tolerance is taken relative to the larger term.
    const double scale = std::max(std::abs(invariant_value(pool)), test::invariant_term_scale(after));
    EXPECT_NEAR(invariant_value(after), invariant_value(pool), 1e-10 * scale)
        << kind_name(pool.kind()) << " delta=" << delta;
  }
}

TEST_P(PoolProperties, MarginalPriceIsNondecreasing) {
  std::mt19937_64 rng(202 + static_cast<int>(GetParam()));
  for (int i = 0; i < 10; ++i) {
    const PoolState pool = test::random_pool(rng, GetParam());
    const TradeDomain d = trade_domain(pool);
    const double lo = std::max(d.delta_min, -10 * pool.reserve_traded()) * 0.99;
    const double hi = d.delta_max * 0.99;
    double prev = marginal_price(pool, lo);
    for (int k = 1; k <= 1000; ++k) {
      const double delta = lo + (hi - lo) * k / 1000.0;
      const double g = marginal_price(pool, delta);
      ASSERT_GE(g, prev * (1 - 1e-13)) << kind_name(pool.kind()) << " at " << delta;
      prev = g;
    }
  }
}

TEST_P(PoolProperties, TradeOutputDerivativeIsMarginalPrice) {
  std::mt19937_64 rng(303 + static_cast<int>(GetParam()));
  for (int i = 0; i < 100; ++i) {
    const PoolState pool = test::random_pool(rng, GetParam());
    const double r = pool.reserve_traded();
    std::uniform_real_distribution<double> frac(-0.5, 0.5);
    const double delta = frac(rng) * r;
    const double h = 1e-6 * r;
    const double fd = (trade_output(pool, delta + h) - trade_output(pool, delta - h)) / (2 * h);
    const double g = marginal_price(pool, delta);
    EXPECT_NEAR(fd, g, 1e-5 * g) << kind_name(pool.kind()) << " delta=" << delta;
  }
}

TEST_P(PoolProperties, UnitFeeLeavesPriceUnchanged) {
  std::mt19937_64 rng(404 + static_cast<int>(GetParam()));
  for (int i = 0; i < 50; ++i) {
    const PoolState pool = test::random_pool(rng, GetParam()).with_fee(1.0);
    const double delta = -0.3 * pool.reserve_traded() * (i + 1) / 50.0;
    EXPECT_EQ(marginal_price_with_fee(pool, delta), marginal_price(pool, delta));
  }
}

// Each fee-bearing trade leaves the reserves worth at least the fee-less
// floor of the pre-trade level set plus the fee on that trade's input.
TEST_P(PoolProperties, FeeBearingTradeStepStaysAboveFloor) {
  std::mt19937_64 rng(505 + static_cast<int>(GetParam()));
  for (int run = 0; run < 40; ++run) {
    const double gamma = test::uniform(rng, 0.9, 1.0);
    PoolState pool = test::random_pool(rng, GetParam()).with_fee(gamma);
    const double c1 = test::uniform(rng, 0.2, 2.2);
    const double c2 = test::uniform(rng, 0.2, 2.2);
    const double floor0 = min_portfolio_value(pool, c1, c2);
    for (int k = 0; k < 10; ++k) {
      const double delta = test::random_feasible_trade(rng, pool, 0.2);
      const double floor_prev = min_portfolio_value(pool, c1, c2);
      const TradeExecution ex = execute_trade(pool, delta);
      const double fee = test::fee_value(ex, gamma, c1, c2);
      pool = ex.after;
      const double value = c1 * pool.reserve_traded() + c2 * pool.reserve_numeraire();
      ASSERT_GE(value, floor_prev + fee - 1e-9 * value) << kind_name(pool.kind()) << " step " << k;
      ASSERT_GE(value, floor0 + fee - 1e-9 * value) << kind_name(pool.kind()) << " step " << k;
    }
  }
}

// When every trade sells the traded coin, the fee-stripped reserves never
// fall below the starting level set, so the fees accumulate in the bound.
TEST_P(PoolProperties, OneSidedFeeSequencesAccumulateTheFeeBound) {
  std::mt19937_64 rng(606 + static_cast<int>(GetParam()));
  for (int run = 0; run < 40; ++run) {
    const double gamma = test::uniform(rng, 0.9, 1.0);
    PoolState pool = test::random_pool(rng, GetParam()).with_fee(gamma);
    const double c1 = test::uniform(rng, 0.2, 2.2);
    const double c2 = test::uniform(rng, 0.2, 2.2);
    const double floor0 = min_portfolio_value(pool, c1, c2);
    double fees = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double delta = -std::abs(test::random_feasible_trade(rng, pool, 0.05));
      const TradeExecution ex = execute_trade(pool, delta);
      fees += test::fee_value(ex, gamma, c1, c2);
      pool = ex.after;
      const double value = c1 * pool.reserve_traded() + c2 * pool.reserve_numeraire();
      ASSERT_GE(value, floor0 + fees - 1e-9 * value) << kind_name(pool.kind()) << " step " << k;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, PoolProperties,
                         ::testing::Values(test::Kind::Sum, test::Kind::Product, test::Kind::Geometric,
                                           test::Kind::Curve),
                         [](const auto& info) { return std::string(test::kind_label(info.param)); });

TEST(BalancerSpecialization, HalfWeightMatchesProduct) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_r(0, std::log(1e6));
  for (int i = 0; i < 200; ++i) {
    const double r = std::exp(log_r(rng));
    const PoolState product(ConstantProduct{}, r, r);
    const PoolState balancer(GeometricMean{0.5}, r, r);
    for (double frac : {-0.7, -0.1, 0.05, 0.6}) {
      const double delta = frac * r;
      EXPECT_NEAR(trade_output(balancer, delta), trade_output(product, delta),
                  1e-12 * std::abs(trade_output(product, delta)));
      EXPECT_NEAR(marginal_price(balancer, delta), marginal_price(product, delta), 1e-12);
    }
  }
}

TEST(MinPortfolioValue, ProductClosedForm) {
  const PoolState pool(ConstantProduct{}, 100, 100);
  EXPECT_NEAR(min_portfolio_value(pool, 1.0, 1.0), 200.0, 1e-9);
  EXPECT_NEAR(min_portfolio_value(pool, 4.0, 1.0), 2 * std::sqrt(4.0 * 10000.0), 1e-8);
}

// Reinvested fees let later trades run against a larger pool, so the fees of
// a round trip do not simply add up on top of the starting floor.
TEST(FeeFloor, SummedFeesCanExceedRealizedValueOnRoundTrips) {
  PoolState pool(ConstantProduct{}, 100, 100, 0.5);
  const double floor0 = min_portfolio_value(pool, 1, 1);
  const TradeExecution sell = execute_trade(pool, -100);
  const TradeExecution buy = execute_trade(sell.after, 120);
  const double fees = test::fee_value(sell, 0.5, 1, 1) + test::fee_value(buy, 0.5, 1, 1);
  const double value = buy.after.reserve_traded() + buy.after.reserve_numeraire();
  EXPECT_NEAR(buy.delta_prime, 200.0, 1e-9);
  EXPECT_NEAR(value, 80.0 + 800.0 / 3.0, 1e-9);
  EXPECT_NEAR(floor0 + fees, 350.0, 1e-9);
  EXPECT_LT(value, floor0 + fees);
  EXPECT_GE(value, min_portfolio_value(sell.after, 1, 1) + test::fee_value(buy, 0.5, 1, 1));
}
