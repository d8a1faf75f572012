#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "copa/market.hpp"
#include "copa/rng.hpp"

namespace copa {

enum class Family { IP, CP, HP };
enum class Quantity { Expenditure, Utility, Value };

std::string to_string(Family family);

// One per-round expectation: bidder k's expected expenditure G, utility U
// (per round) or obtained value V, under the family's bidding shape at the
// given multipliers, budgets ignored.
struct ExpectationQuery {
  Family family = Family::IP;
  Quantity quantity = Quantity::Expenditure;
  int bidder = 0;
  Eigen::VectorXd multipliers;  // lambda (IP/HP) or xi (CP)
  double hp_external = 0.0;     // mu_k, HP only; must be <= multipliers[bidder]
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Common-random-number draws shared across queries: one (values, outside)
// matrix reused by every estimate so that differences between families or
// multipliers are samplewise-coupled.
class SampleCache {
 public:
  SampleCache(const MarketConfig& market, int n, uint64_t seed, StreamId id = {});
  const Eigen::MatrixXd& values() const { return values_; }  // n x K
  const Eigen::VectorXd& outside() const { return outside_; }
  int count() const { return int(outside_.size()); }

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd outside_;
};

// Win indicator and price paid for one sample row under a family's shape.
struct WinPrice {
  bool win = false;
  double price = 0.0;
};
WinPrice win_and_price(const ExpectationQuery& q, const Eigen::VectorXd& values,
                       double outside);

Estimate estimate_mc(const ExpectationQuery& q, const SampleCache& cache);

// Deterministic quadrature for one- and two-bidder markets (the spec rejects
// quadrature beyond three underlying dimensions). Value laws need densities;
// the outside law may be continuous or a point mass.
Estimate estimate_quadrature(const ExpectationQuery& q, const MarketConfig& market,
                             double tol = 1e-9);

std::vector<Estimate> estimate_batch(std::span<const ExpectationQuery> queries,
                                     const SampleCache& cache);

}  // namespace copa
