#include <doctest.h>

#include <cmath>
#include <vector>

#include "copa/auction.hpp"
#include "copa/strategies.hpp"

using namespace copa;

namespace {

MarketConfig symmetric_market(int k_count, double rho, double cap, int horizon,
                              Distribution value, Distribution outside,
                              double init = 0.0, double step_c = 0.1) {
  std::vector<BidderSpec> bidders;
  for (int k = 0; k < k_count; ++k) bidders.push_back({value, rho, cap, std::nullopt});
  return MarketConfig{std::move(bidders),
                      std::move(outside),
                      horizon,
                      StepSchedule::inverse_sqrt(step_c),
                      Eigen::VectorXd::Constant(k_count, init),
                      TraceDetail::Summary};
}

Eigen::VectorXd vec(std::vector<double> xs) {
  return Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
}

}  // namespace

TEST_CASE("individual pacing bid is the shaded value under the budget cap") {
  PacingState state{vec({0.2}), vec({10.0})};
  RoundDraw draw;
  draw.values = vec({0.6});
  draw.outside_bid = 0.0;
  const Eigen::VectorXd bids = ip_bids(state, draw);
  CHECK(bids[0] == doctest::Approx(0.5));

  state.remaining[0] = 0.3;
  CHECK(ip_bids(state, draw)[0] == doctest::Approx(0.3));
}

TEST_CASE("multiplier update at balance and at the projection boundary") {
  auto market = symmetric_market(1, 0.25, 4.0, 100, Distribution::uniform(0, 1),
                                 Distribution::uniform(0, 1));
  const double eps = 0.1;

  PacingState state{vec({0.0}), vec({25.0})};
  RoundOutcome outcome;
  outcome.expenditure = vec({0.25});  // spend equals the target: no movement
  ip_update(state, market, outcome, eps);
  CHECK(state.multiplier[0] == 0.0);

  outcome.expenditure = vec({0.0});  // underspend pushes down, projected at 0
  ip_update(state, market, outcome, eps);
  CHECK(state.multiplier[0] == 0.0);

  outcome.expenditure = vec({0.35});  // overspend raises the multiplier
  ip_update(state, market, outcome, eps);
  CHECK(state.multiplier[0] == doctest::Approx(0.01));
}

TEST_CASE("coordinated election picks the highest shaded bid") {
  RoundDraw draw;
  draw.values = vec({0.8, 0.6});
  draw.outside_bid = 0.0;
  PacingState state{vec({0.0, 0.0}), vec({100.0, 100.0})};
  auto bids = cp_bids(state, draw);
  CHECK(bids.elected == 0);
  CHECK(bids.external[0] == doctest::Approx(0.8));
  CHECK(bids.external[1] == 0.0);

  // Shading flips the argmax: 0.9 / 1.5 = 0.6 < 0.8.
  draw.values = vec({0.8, 0.9});
  state.multiplier = vec({0.0, 0.5});
  bids = cp_bids(state, draw);
  CHECK(bids.internal[0] == doctest::Approx(0.8));
  CHECK(bids.internal[1] == doctest::Approx(0.6));
  CHECK(bids.elected == 0);
  CHECK(bids.external[1] == 0.0);
}

TEST_CASE("non-selected multiplier drifts down by eps rho until zero") {
  auto market = symmetric_market(2, 0.3, 4.0, 100, Distribution::uniform(0, 1),
                                 Distribution::uniform(0, 1));
  const double eps = 0.05;
  PacingState state{vec({0.0, 0.1}), vec({30.0, 30.0})};
  RoundOutcome idle;
  idle.expenditure = vec({0.3, 0.0});  // bidder 1 never selected
  for (int n = 1; n <= 10; ++n) {
    cp_update(state, market, idle, eps);
    CHECK(state.multiplier[1] ==
          doctest::Approx(std::max(0.0, 0.1 - n * eps * 0.3)));
  }
  CHECK(state.multiplier[1] == 0.0);
}

TEST_CASE("hybrid round matches the worked example") {
  RoundDraw draw;
  draw.values = vec({0.8, 0.6});
  draw.outside_bid = 0.5;
  HybridState state{vec({0.0, 0.0}), vec({0.0, 0.0}), vec({100.0, 100.0}), 0.0, 0};
  const auto bids = hp_bids(state, draw);
  CHECK(bids.elected == 0);
  CHECK(bids.external[0] == doctest::Approx(0.8));
  CHECK(bids.external[1] == 0.0);

  const auto outcome = resolve_round(draw, bids.external);
  CHECK(outcome.winner == 0);
  CHECK(outcome.expenditure[0] == doctest::Approx(0.5));

  const Eigen::VectorXd pseudo = hp_pseudo_expenditure(bids, outcome);
  CHECK(pseudo[0] == doctest::Approx(0.5));
  CHECK(pseudo[1] == 0.0);
}

TEST_CASE("external multiplier stays below the pseudo multiplier") {
  auto market = symmetric_market(3, 0.2, 6.0, 2000,
                                 Distribution::uniform(0.0, 1.0),
                                 Distribution::truncated_gaussian(0.5, 0.2, 0, 1.1),
                                 0.5);
  market.trace_detail = TraceDetail::Full;
  const auto sim = run_simulation(market, StrategyKind::HP, 21);
  for (const auto& rec : sim.trace)
    for (int k = 0; k < 3; ++k) {
      CHECK(rec.external[k] <= rec.multiplier[k] + 0.0);
      CHECK(rec.multiplier[k] >= 0.0);
      CHECK(rec.multiplier[k] <= 6.0);
    }
}

TEST_CASE("pseudo expenditure equals the individual-pacing expenditure identity") {
  // z' must equal 1{b_internal >= d} d with d = max(internal rival, outside).
  auto market = symmetric_market(3, 0.25, 5.0, 3000,
                                 Distribution::uniform(0.0, 1.0),
                                 Distribution::uniform(0.0, 0.9));
  market.trace_detail = TraceDetail::Full;
  const auto sim = run_simulation(market, StrategyKind::HP, 5);
  for (const auto& rec : sim.trace) {
    for (int k = 0; k < 3; ++k) {
      double rival = 0.0;
      for (int i = 0; i < 3; ++i)
        if (i != k) rival = std::max(rival, rec.outcome.internal_bids[i]);
      const double d = std::max(rival, rec.draw.outside_bid);
      const double expected = rec.outcome.internal_bids[k] >= d ? d : 0.0;
      CHECK(rec.outcome.pseudo_expenditure[k] == expected);
    }
  }
}

TEST_CASE("single round against a strong outside bid earns nothing") {
  MarketConfig market{{{Distribution::point_mass(0.5), 0.2, 2.5, std::nullopt}},
                      Distribution::point_mass(0.9),
                      1,
                      StepSchedule::inverse_sqrt(0.1),
                      Eigen::VectorXd::Zero(1),
                      TraceDetail::Summary};
  const auto sim = run_simulation(market, StrategyKind::IP, 1);
  CHECK(sim.summary.bidders[0].avg_utility == 0.0);
  CHECK(sim.summary.bidders[0].win_rate == 0.0);
}

TEST_CASE("bid rotation holds for CP and HP every round") {
  auto market = symmetric_market(5, 0.2, 5.0, 500,
                                 Distribution::truncated_gaussian(0.5, 0.2, 0, 1),
                                 Distribution::truncated_gaussian(0.5, 0.2, 0, 1.1));
  market.trace_detail = TraceDetail::Full;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    for (StrategyKind kind : {StrategyKind::CP, StrategyKind::HP}) {
      const auto sim = run_simulation(market, kind, seed);
      for (const auto& rec : sim.trace) {
        int nonzero = 0;
        for (int k = 0; k < 5; ++k)
          if (rec.outcome.bids[k] > 0.0) ++nonzero;
        CHECK(nonzero <= 1);
      }
    }
  }
}

TEST_CASE("budgets are never exceeded, including under tiny rates") {
  auto market = symmetric_market(3, 0.011, 100.0, 800,
                                 Distribution::uniform(0.0, 1.0),
                                 Distribution::uniform(0.0, 0.8));
  market.trace_detail = TraceDetail::Full;
  for (StrategyKind kind :
       {StrategyKind::IP, StrategyKind::CP, StrategyKind::HP}) {
    const auto sim = run_simulation(market, kind, 3);
    std::vector<RoundOutcome> outcomes;
    for (const auto& rec : sim.trace) outcomes.push_back(rec.outcome);
    CHECK(check_feasibility(outcomes, market.rhos() * double(market.horizon)));
  }
}

TEST_CASE("hybrid pseudo multipliers track individual pacing bit for bit") {
  // No budget cap can bind: spend per round is at most the outside support
  // top (0.2), far below rho, so remaining budget stays above every bid.
  auto market = symmetric_market(3, 0.5, 6.0, 10000,
                                 Distribution::uniform(0.0, 1.0),
                                 Distribution::uniform(0.0, 0.2), 0.3);
  market.trace_detail = TraceDetail::Full;
  const auto hp = run_simulation(market, StrategyKind::HP, 99);
  const auto ip = run_simulation(market, StrategyKind::IP, 99);
  REQUIRE(hp.trace.size() == ip.trace.size());
  for (size_t t = 0; t < hp.trace.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      CHECK(hp.trace[t].draw.values[k] == ip.trace[t].draw.values[k]);
      CHECK(hp.trace[t].multiplier[k] == ip.trace[t].multiplier[k]);
    }
    CHECK(hp.trace[t].draw.outside_bid == ip.trace[t].draw.outside_bid);
  }
}

TEST_CASE("elected bidder's external bid dominates her internal bid") {
  auto market = symmetric_market(4, 0.3, 4.0, 2000,
                                 Distribution::uniform(0.0, 1.0),
                                 Distribution::uniform(0.0, 1.0), 0.8);
  market.trace_detail = TraceDetail::Full;
  const auto sim = run_simulation(market, StrategyKind::HP, 17);
  for (const auto& rec : sim.trace) {
    int elected = -1;
    for (int k = 0; k < 4; ++k)
      if (rec.outcome.bids[k] > 0.0) elected = k;
    if (elected >= 0)
      CHECK(rec.outcome.internal_bids[elected] <= rec.outcome.bids[elected]);
  }
}

TEST_CASE("positive projection errors are rare") {
  const int horizon = 100000;
  auto market = symmetric_market(2, 0.3, 4.0, horizon,
                                 Distribution::uniform(0.0, 1.0),
                                 Distribution::uniform(0.0, 0.6), 0.2);
  const auto sim = run_simulation(market, StrategyKind::HP, 31);
  const double eps = market.step.epsilon(horizon);
  const double density_bound = 1.0 / 0.6;  // top of the outside density
  const double freq = sim.summary.positive_projection_freq;
  const double se = std::sqrt(std::max(freq, 1e-6) * (1.0 - freq) / horizon);
  CHECK(freq <= eps * 1.0 * 1.0 * density_bound + 3.0 * se);
}

TEST_CASE("ending time counts rounds with healthy budgets") {
  auto market = symmetric_market(2, 0.5, 4.0, 300, Distribution::uniform(0, 1),
                                 Distribution::uniform(0, 0.3));
  const auto sim = run_simulation(market, StrategyKind::IP, 2);
  CHECK(sim.summary.ending_time == 300);  // spend can never outpace 0.5/round
}
