#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "copa/distributions.hpp"

namespace copa {

struct BidderSpec {
  Distribution value_dist;
  double rho;             // target expenditure rate, in (0, support_hi)
  double multiplier_cap;  // >= support_hi / effective rho
  std::optional<double> reported_rho;  // under-report for misreport runs

  // The rate the pacing dynamics chase (the reported one when present).
  double effective_rho() const { return reported_rho.value_or(rho); }
};

// Step schedule epsilon_T = c * T^(-1/2). The inverse-sqrt family satisfies
// the diminishing-step conditions the analyses need; the remaining
// requirement (support_hi * epsilon < 1) is checked when a market is built.
struct StepSchedule {
  double c = 1.0;
  static StepSchedule inverse_sqrt(double c);
  double epsilon(int horizon) const;
};

enum class TraceDetail { Summary, Full };

struct MarketConfig {
  std::vector<BidderSpec> bidders;
  Distribution outside;  // law of the highest bid outside the coalition
  int horizon = 1;
  StepSchedule step = StepSchedule{1.0};
  Eigen::VectorXd initial_multipliers;  // size K, or size 1 broadcast
  TraceDetail trace_detail = TraceDetail::Summary;

  int size() const { return int(bidders.size()); }
  Eigen::VectorXd rhos() const;            // true rates
  Eigen::VectorXd effective_rhos() const;  // rates the dynamics chase
  Eigen::VectorXd caps() const;
  Eigen::VectorXd value_hi() const;
  Eigen::VectorXd initial_vector() const;  // broadcast to size K

  // Throws std::invalid_argument when any invariant is broken.
  void validate() const;
};

}  // namespace copa
