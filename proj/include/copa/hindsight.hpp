#pragma once

#include <Eigen/Core>
#include <vector>

#include "copa/estimators.hpp"
#include "copa/market.hpp"

namespace copa {

// A realized instance of the hindsight allocation problem: pick at most one
// winner per round to maximize total welfare subject to per-bidder knapsack
// capacities T * rho_k on spend at the outside price.
struct HindsightInstance {
  Eigen::MatrixXd values;   // T x K
  Eigen::VectorXd outside;  // length T
  Eigen::VectorXd rhos;     // per-bidder target rates

  int rounds() const { return int(values.rows()); }
  int bidder_count() const { return int(values.cols()); }
};

HindsightInstance draw_instance(const MarketConfig& market, int rounds,
                                uint64_t seed, StreamId id = {});

struct HindsightSolution {
  double welfare = 0.0;
  std::vector<int> winner;  // per round; -1 leaves the slot outside
};

// Exact optimum by branch and bound over rounds with a Lagrangian suffix
// bound (plain enumeration for T <= 12). Rejects K > 3 or T > 20.
HindsightSolution hindsight_exact(const HindsightInstance& instance);

// Per-round Lagrangian dual value Phi(mu) of the instance; weak duality
// gives hindsight_exact <= T * dual_bound for every mu >= 0.
double dual_bound(const HindsightInstance& instance, const Eigen::VectorXd& mu);

// Monte-Carlo Phi(mu) for a market.
Estimate dual_bound(const MarketConfig& market, const Eigen::VectorXd& mu,
                    const SampleCache& cache);

struct DualSolution {
  Eigen::VectorXd mu;
  double value = 0.0;
  Eigen::VectorXd selection_residual;  // rho_k - G^S_k(mu) at the solution
  int iterations = 0;
};

// Projected subgradient descent on Monte-Carlo Phi.
DualSolution minimize_dual(const MarketConfig& market, const SampleCache& cache,
                           int iterations = 4000, double eta0 = 0.5);

}  // namespace copa
