#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "copa/equilibrium.hpp"
#include "copa/hindsight.hpp"

using namespace copa;

namespace {

HindsightInstance make_instance(std::vector<std::vector<double>> values,
                                std::vector<double> outside,
                                std::vector<double> rhos) {
  HindsightInstance inst;
  const int rounds = int(values.size());
  const int k_count = int(values.front().size());
  inst.values.resize(rounds, k_count);
  for (int t = 0; t < rounds; ++t)
    for (int k = 0; k < k_count; ++k) inst.values(t, k) = values[t][k];
  inst.outside = Eigen::Map<Eigen::VectorXd>(outside.data(), outside.size());
  inst.rhos = Eigen::Map<Eigen::VectorXd>(rhos.data(), rhos.size());
  return inst;
}

HindsightInstance random_instance(RngStream& rng, int max_rounds = 8,
                                  int max_bidders = 3) {
  const int rounds = 2 + int(rng.next_unit() * (max_rounds - 1));
  const int k_count = 1 + int(rng.next_unit() * max_bidders);
  std::vector<std::vector<double>> values(rounds, std::vector<double>(k_count));
  std::vector<double> outside(rounds);
  std::vector<double> rhos(k_count);
  for (int t = 0; t < rounds; ++t) {
    for (int k = 0; k < k_count; ++k) values[t][k] = rng.next_unit();
    outside[t] = 0.05 + 0.9 * rng.next_unit();
  }
  for (int k = 0; k < k_count; ++k) rhos[k] = 0.05 + 0.5 * rng.next_unit();
  return make_instance(values, outside, rhos);
}

// Test-side oracle: plain enumeration over all (K+1)^T allocations.
double enumerate_welfare(const HindsightInstance& inst) {
  const int rounds = inst.rounds();
  const int k_count = inst.bidder_count();
  double best = 0.0;
  std::vector<int> pick(rounds, -1);
  long total = 1;
  for (int t = 0; t < rounds; ++t) total *= (k_count + 1);
  for (long code = 0; code < total; ++code) {
    long c = code;
    double welfare = 0.0;
    Eigen::VectorXd spent = Eigen::VectorXd::Zero(k_count);
    bool feasible = true;
    for (int t = 0; t < rounds && feasible; ++t) {
      const int choice = int(c % (k_count + 1)) - 1;
      c /= (k_count + 1);
      if (choice >= 0) {
        spent[choice] += inst.outside[t];
        if (spent[choice] > inst.rhos[choice] * rounds + 1e-12) feasible = false;
        welfare += inst.values(t, choice) - inst.outside[t];
      }
    }
    if (feasible) best = std::max(best, welfare);
  }
  return best;
}

}  // namespace

TEST_CASE("two-round knapsack example") {
  const auto inst = make_instance({{0.9}, {0.5}}, {0.2, 0.3}, {0.25});
  const auto sol = hindsight_exact(inst);
  CHECK(sol.welfare == doctest::Approx(0.9));
  CHECK(sol.winner[0] == 0);
  CHECK(sol.winner[1] == 0);
}

TEST_CASE("dominated values leave the slot outside") {
  const auto inst =
      make_instance({{0.1, 0.2}, {0.3, 0.1}}, {0.9, 0.95}, {0.5, 0.5});
  CHECK(hindsight_exact(inst).welfare == 0.0);
}

TEST_CASE("zero capacity forces an empty allocation") {
  const auto inst = make_instance({{0.9}, {0.8}}, {0.2, 0.3}, {0.0});
  const auto sol = hindsight_exact(inst);
  CHECK(sol.welfare == 0.0);
  CHECK(sol.winner[0] == -1);
}

TEST_CASE("instance limits are enforced") {
  HindsightInstance inst;
  inst.values.resize(25, 1);
  inst.values.setConstant(0.5);
  inst.outside = Eigen::VectorXd::Constant(25, 0.1);
  inst.rhos = Eigen::VectorXd::Constant(1, 0.2);
  CHECK_THROWS_AS(hindsight_exact(inst), std::invalid_argument);
}

TEST_CASE("branch and bound equals plain enumeration") {
  RngStream rng(303, {});
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = random_instance(rng);
    CHECK(hindsight_exact(inst).welfare ==
          doctest::Approx(enumerate_welfare(inst)).epsilon(1e-10));
  }
}

TEST_CASE("weak duality against random multipliers") {
  RngStream rng(304, {});
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(rng);
    const double exact = hindsight_exact(inst).welfare;
    for (int m = 0; m < 10; ++m) {
      Eigen::VectorXd mu(inst.bidder_count());
      for (int k = 0; k < mu.size(); ++k) mu[k] = 3.0 * rng.next_unit();
      CHECK(exact <= inst.rounds() * dual_bound(inst, mu) + 1e-9);
    }
  }
}

TEST_CASE("grid minimum of the dual still dominates the exact optimum") {
  RngStream rng(305, {});
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng, 6, 2);
    const double exact = hindsight_exact(inst).welfare;
    double best = std::numeric_limits<double>::infinity();
    for (double m0 = 0.0; m0 <= 4.0; m0 += 0.25) {
      if (inst.bidder_count() == 1) {
        best = std::min(best, dual_bound(inst, Eigen::VectorXd::Constant(1, m0)));
      } else {
        for (double m1 = 0.0; m1 <= 4.0; m1 += 0.25) {
          Eigen::VectorXd mu(2);
          mu << m0, m1;
          best = std::min(best, dual_bound(inst, mu));
        }
      }
    }
    CHECK(inst.rounds() * best >= exact - 1e-9);
  }
}

TEST_CASE("welfare is monotone in the capacities") {
  RngStream rng(306, {});
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_instance(rng, 6, 2);
    const double base = hindsight_exact(inst).welfare;
    inst.rhos[0] += 0.3;
    CHECK(hindsight_exact(inst).welfare >= base - 1e-12);
  }
}

TEST_CASE("dual minimization in a symmetric market matches the CP equilibrium") {
  MarketConfig market{{{Distribution::uniform(0.0, 1.0), 0.08, 15.0, std::nullopt},
                       {Distribution::uniform(0.0, 1.0), 0.08, 15.0, std::nullopt}},
                      Distribution::uniform(0.0, 1.0),
                      1000,
                      StepSchedule::inverse_sqrt(0.1),
                      Eigen::VectorXd::Zero(2),
                      TraceDetail::Summary};
  const SampleCache cache(market, 400000, 41);
  const auto dual = minimize_dual(market, cache, 3000);
  CHECK(std::abs(dual.mu[0] - dual.mu[1]) < 0.03);  // symmetric components

  const auto cp = solve_ncp(Family::CP, market,
                            EstimationMethod::quadrature(1e-9), 1e-5, 40000, 2.0);
  REQUIRE(cp.converged);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(dual.mu[k] - cp.multipliers[k]) < 0.05);

  // Ample budgets drive the dual solution to zero.
  MarketConfig ample = market;
  ample.bidders[0].rho = 0.6;
  ample.bidders[1].rho = 0.6;
  const SampleCache cache2(ample, 200000, 42);
  CHECK(minimize_dual(ample, cache2, 2000).mu.maxCoeff() < 0.02);
}
