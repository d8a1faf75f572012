#include <doctest.h>

#include <cmath>
#include <vector>

#include "copa/estimators.hpp"

using namespace copa;

namespace {

MarketConfig unit_market(int k_count, double rho = 0.2, double cap = 10.0) {
  std::vector<BidderSpec> bidders;
  for (int k = 0; k < k_count; ++k)
    bidders.push_back({Distribution::uniform(0.0, 1.0), rho, cap, std::nullopt});
  return MarketConfig{std::move(bidders),
                      Distribution::uniform(0.0, 1.0),
                      1000,
                      StepSchedule::inverse_sqrt(0.1),
                      Eigen::VectorXd::Zero(k_count),
                      TraceDetail::Summary};
}

ExpectationQuery query(Family family, Quantity quantity, int bidder,
                       Eigen::VectorXd mult, double mu = 0.0) {
  ExpectationQuery q;
  q.family = family;
  q.quantity = quantity;
  q.bidder = bidder;
  q.multipliers = std::move(mult);
  q.hp_external = mu;
  return q;
}

}  // namespace

TEST_CASE("closed form expenditure for the uniform single-bidder market") {
  // G(lambda) = 1 / (6 (1 + lambda)^2) for v, d ~ U[0,1].
  const auto market = unit_market(1);
  const SampleCache cache(market, 400000, 2024);
  for (double lambda : {0.0, 1.0}) {
    const auto q = query(Family::IP, Quantity::Expenditure, 0,
                         Eigen::VectorXd::Constant(1, lambda));
    const double expected = 1.0 / (6.0 * (1.0 + lambda) * (1.0 + lambda));
    const Estimate mc = estimate_mc(q, cache);
    CHECK(std::abs(mc.value - expected) < 4.0 * mc.std_error);
    const Estimate quad = estimate_quadrature(q, market, 1e-10);
    CHECK(quad.value == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("hybrid expenditure never exceeds individual expenditure samplewise") {
  const auto market = unit_market(2);
  const SampleCache cache(market, 200000, 9);
  const Eigen::VectorXd mult = Eigen::VectorXd::Constant(2, 0.4);
  for (int k = 0; k < 2; ++k) {
    auto hp = query(Family::HP, Quantity::Expenditure, k, mult, 0.4);
    auto ip = query(Family::IP, Quantity::Expenditure, k, mult);
    // With mu = lambda the win events coincide and the HP price d_O is
    // bounded by the IP price d_k on every sample.
    CHECK(estimate_mc(hp, cache).value <= estimate_mc(ip, cache).value + 1e-15);
  }
}

TEST_CASE("coordinated expenditure never exceeds individual samplewise") {
  const auto market = unit_market(3);
  const SampleCache cache(market, 200000, 10);
  const Eigen::VectorXd mult = Eigen::VectorXd::Constant(3, 0.25);
  for (int k = 0; k < 3; ++k) {
    auto cp = query(Family::CP, Quantity::Expenditure, k, mult);
    auto ip = query(Family::IP, Quantity::Expenditure, k, mult);
    CHECK(estimate_mc(cp, cache).value <= estimate_mc(ip, cache).value + 1e-15);
  }
}

TEST_CASE("value under coordination coincides with the individual value") {
  const auto market = unit_market(3);
  const SampleCache cache(market, 100000, 11);
  const Eigen::VectorXd mult = Eigen::VectorXd::Constant(3, 0.3);
  for (int k = 0; k < 3; ++k) {
    const Estimate cp =
        estimate_mc(query(Family::CP, Quantity::Value, k, mult), cache);
    const Estimate ip =
        estimate_mc(query(Family::IP, Quantity::Value, k, mult), cache);
    CHECK(cp.value == ip.value);  // identical win event and integrand
  }
}

TEST_CASE("duplicated queries in a batch return identical estimates") {
  const auto market = unit_market(2);
  const SampleCache cache(market, 50000, 12);
  const auto q =
      query(Family::IP, Quantity::Utility, 0, Eigen::VectorXd::Constant(2, 0.1));
  const std::vector<ExpectationQuery> queries = {q, q};
  const auto out = estimate_batch(queries, cache);
  CHECK(out[0].value == out[1].value);
  CHECK(out[0].std_error == out[1].std_error);
}

TEST_CASE("raising the own multiplier never raises G, U, or V") {
  const auto market = unit_market(2);
  const SampleCache cache(market, 100000, 13);
  Eigen::VectorXd base = Eigen::VectorXd::Constant(2, 0.2);
  Eigen::VectorXd raised = base;
  raised[0] = 0.5;
  for (Quantity quantity :
       {Quantity::Expenditure, Quantity::Utility, Quantity::Value}) {
    for (Family family : {Family::IP, Family::CP}) {
      const double lo = estimate_mc(query(family, quantity, 0, raised), cache).value;
      const double hi = estimate_mc(query(family, quantity, 0, base), cache).value;
      CHECK(lo <= hi + 1e-12);
    }
    // HP: raise only the external multiplier.
    const double lo =
        estimate_mc(query(Family::HP, quantity, 0, base, 0.2), cache).value;
    const double hi =
        estimate_mc(query(Family::HP, quantity, 0, base, 0.0), cache).value;
    CHECK(lo <= hi + 1e-12);
  }
}

TEST_CASE("quadrature agrees with Monte Carlo for one and two bidders") {
  for (int k_count : {1, 2}) {
    MarketConfig market{{},
                        Distribution::truncated_gaussian(0.5, 0.2, 0.0, 1.1),
                        1000,
                        StepSchedule::inverse_sqrt(0.1),
                        Eigen::VectorXd::Zero(k_count),
                        TraceDetail::Summary};
    for (int k = 0; k < k_count; ++k)
      market.bidders.push_back({Distribution::truncated_gaussian(0.5, 0.2, 0, 1),
                                0.2, 10.0, std::nullopt});
    const SampleCache cache(market, 1000000, 77);
    Eigen::VectorXd mult(k_count);
    for (int k = 0; k < k_count; ++k) mult[k] = 0.15 + 0.2 * k;

    for (Family family : {Family::IP, Family::CP, Family::HP}) {
      for (Quantity quantity :
           {Quantity::Expenditure, Quantity::Utility, Quantity::Value}) {
        const double mu = family == Family::HP ? 0.1 : 0.0;
        const auto q = query(family, quantity, 0, mult, mu);
        const Estimate mc = estimate_mc(q, cache);
        const Estimate quad = estimate_quadrature(q, market, 1e-8);
        CHECK(std::abs(mc.value - quad.value) <=
              4.0 * std::max(mc.std_error, 1e-6));
      }
    }
  }
}

TEST_CASE("quadrature rejects more than three dimensions") {
  const auto market = unit_market(3);
  const auto q = query(Family::IP, Quantity::Expenditure, 0,
                       Eigen::VectorXd::Zero(3));
  CHECK_THROWS_AS(estimate_quadrature(q, market, 1e-8), std::invalid_argument);
}

TEST_CASE("utility decomposes exactly as value minus expenditure") {
  const auto market = unit_market(2);
  const SampleCache cache(market, 80000, 15);
  const Eigen::VectorXd mult = Eigen::VectorXd::Constant(2, 0.35);
  for (Family family : {Family::IP, Family::CP, Family::HP}) {
    const double mu = family == Family::HP ? 0.2 : 0.0;
    const double u =
        estimate_mc(query(family, Quantity::Utility, 0, mult, mu), cache).value;
    const double v =
        estimate_mc(query(family, Quantity::Value, 0, mult, mu), cache).value;
    const double g =
        estimate_mc(query(family, Quantity::Expenditure, 0, mult, mu), cache)
            .value;
    CHECK(u == v - g);  // bitwise, same matched pass
  }
}

TEST_CASE("per-sample utility is the value minus the price, bit for bit") {
  const auto market = unit_market(2);
  const SampleCache cache(market, 5000, 16);
  const auto q =
      query(Family::IP, Quantity::Utility, 0, Eigen::VectorXd::Constant(2, 0.1));
  for (int i = 0; i < cache.count(); ++i) {
    const WinPrice wp = win_and_price(q, cache.values().row(i), cache.outside()[i]);
    const double value = cache.values()(i, 0);
    const double u = wp.win ? value - wp.price : 0.0;
    const double v = wp.win ? value : 0.0;
    const double g = wp.win ? wp.price : 0.0;
    CHECK(u == v - g);
  }
}

TEST_CASE("invalid queries are rejected") {
  const auto market = unit_market(2);
  const SampleCache cache(market, 100, 1);
  auto q = query(Family::HP, Quantity::Expenditure, 0,
                 Eigen::VectorXd::Constant(2, 0.1), 0.5);
  CHECK_THROWS_AS(estimate_mc(q, cache), std::invalid_argument);  // mu > lambda
  q = query(Family::IP, Quantity::Expenditure, 5, Eigen::VectorXd::Constant(2, 0.1));
  CHECK_THROWS_AS(estimate_mc(q, cache), std::invalid_argument);
}
