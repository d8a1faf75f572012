#include <doctest.h>

#include <vector>

#include "copa/auction.hpp"
#include "copa/rng.hpp"

using namespace copa;

namespace {

RoundDraw make_draw(std::vector<double> values, double outside, int round = 1) {
  RoundDraw draw;
  draw.values = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  draw.outside_bid = outside;
  draw.round = round;
  return draw;
}

Eigen::VectorXd vec(std::vector<double> xs) {
  return Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
}

}  // namespace

TEST_CASE("truthful single bidder win") {
  const auto out = resolve_round(make_draw({0.5}, 0.3), vec({0.5}));
  CHECK(out.allocation[0] == 1);
  CHECK(out.expenditure[0] == doctest::Approx(0.3));
  CHECK(out.utility[0] == doctest::Approx(0.2));
}

TEST_CASE("outside bid takes the slot") {
  const auto out = resolve_round(make_draw({0.7, 0.5}, 0.6), vec({0.4, 0.0}));
  CHECK(out.winner == -1);
  CHECK(out.allocation.sum() == 0);
  CHECK(out.expenditure.sum() == 0.0);
  CHECK(out.utility.sum() == 0.0);
}

TEST_CASE("second price payment") {
  const auto out = resolve_round(make_draw({0.8, 0.6}, 0.5), vec({0.8, 0.0}));
  CHECK(out.winner == 0);
  CHECK(out.expenditure[0] == doctest::Approx(0.5));
  CHECK(out.utility[0] == doctest::Approx(0.3));
  CHECK(out.expenditure[1] == 0.0);
}

TEST_CASE("tie against the outside bid goes to the member") {
  const auto out = resolve_round(make_draw({0.9}, 0.5), vec({0.5}));
  CHECK(out.winner == 0);
  CHECK(out.expenditure[0] == doctest::Approx(0.5));
}

TEST_CASE("tie between members goes to the lowest index") {
  const auto out = resolve_round(make_draw({0.9, 0.9}, 0.1), vec({0.7, 0.7}));
  CHECK(out.winner == 0);
  CHECK(out.allocation[0] == 1);
  CHECK(out.allocation[1] == 0);
  CHECK(out.expenditure[0] == doctest::Approx(0.7));
}

TEST_CASE("dimension mismatch is a configuration error") {
  CHECK_THROWS_AS(resolve_round(make_draw({0.5, 0.6}, 0.1), vec({0.5})),
                  std::invalid_argument);
  CHECK_THROWS_AS(resolve_round(make_draw({0.5}, 0.1), vec({-0.2})),
                  std::invalid_argument);
}

TEST_CASE("feasibility on explicit traces") {
  const Eigen::VectorXd budget = vec({0.25});
  CHECK(check_feasibility({}, budget));
  std::vector<RoundOutcome> trace;
  trace.push_back(resolve_round(make_draw({0.5}, 0.3), vec({0.5})));
  CHECK_FALSE(check_feasibility(trace, budget));
  CHECK(check_feasibility(trace, vec({0.30})));
}

TEST_CASE("slot accounting over random rounds") {
  RngStream rng(11, {});
  for (int trial = 0; trial < 500; ++trial) {
    const int k_count = 1 + int(rng.next_unit() * 4);
    std::vector<double> values(k_count), bids(k_count);
    for (int k = 0; k < k_count; ++k) {
      values[k] = rng.next_unit();
      bids[k] = rng.next_unit();
    }
    const double outside = rng.next_unit();
    const auto out = resolve_round(make_draw(values, outside), vec(bids));

    CHECK(out.allocation.sum() <= 1);
    for (int k = 0; k < k_count; ++k) {
      CHECK(out.expenditure[k] == (out.allocation[k] ? out.competing[k] : 0.0));
      CHECK(out.utility[k] ==
            (out.allocation[k] ? values[k] - out.competing[k] : 0.0));
      if (out.allocation[k]) {
        CHECK(bids[k] >= out.competing[k]);    // winner met the price
        CHECK(out.expenditure[k] <= bids[k]);  // never pays above the bid
      }
    }
    // When no member wins the outside bid was at least every member's bid.
    if (out.winner < 0) {
      double top = 0.0;
      for (double b : bids) top = std::max(top, b);
      CHECK(outside >= top);
    }
  }
}
