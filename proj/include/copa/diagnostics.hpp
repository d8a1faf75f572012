#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "copa/strategies.hpp"

namespace copa {

// Trace export, one row per (round, bidder):
// round,bidder,value,internal_bid,external_bid,competing,won,expenditure,
// pseudo_expenditure,utility,lambda,mu_or_xi,remaining_budget
// Optional fields a strategy lacks stay empty. Floats carry 17 significant
// digits.
void write_trace_csv(const std::string& path, std::span<const RoundRecord> trace,
                     StrategyKind kind);

struct ConvergenceDiagnostics {
  // One entry per multiplier series the trace carries (lambda/xi, then mu).
  // Values are per bidder.
  std::vector<Eigen::VectorXd> running_average_variance;
  Eigen::VectorXd complementarity_residual;  // |avg mult * (rho - avg z)|
};

// Variance of the last `window` running averages of each multiplier series
// and the complementarity residual computed from empirical average
// expenditure. Throws when the trace is shorter than the window.
ConvergenceDiagnostics convergence_diagnostics(std::span<const RoundRecord> trace,
                                               const Eigen::VectorXd& rhos,
                                               int window = 100);

}  // namespace copa
