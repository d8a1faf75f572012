#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "copa/auction.hpp"
#include "copa/market.hpp"
#include "copa/rng.hpp"

namespace copa {

enum class StrategyKind { IP, CP, HP };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);

// State of the simultaneous individual pacing benchmark (IP) and of
// coordinated pacing (CP); `multiplier` is lambda for IP and xi for CP.
struct PacingState {
  Eigen::VectorXd multiplier;
  Eigen::VectorXd remaining;
};

// Hybrid pacing keeps a pseudo multiplier (internal election) and an
// external multiplier clamped into [0, pseudo] after every update.
struct HybridState {
  Eigen::VectorXd pseudo;
  Eigen::VectorXd external;
  Eigen::VectorXd remaining;
  double positive_projection_sum = 0.0;  // running sum of P+ projection errors
  long positive_projection_rounds = 0;   // rounds with P+ > 0
};

struct CoordinatedBids {
  Eigen::VectorXd external;  // what the coalition posts
  Eigen::VectorXd internal;  // election quantities
  int elected = -1;
};

// Every member bids min(value / (1 + multiplier), remaining budget).
Eigen::VectorXd ip_bids(const PacingState& state, const RoundDraw& draw);
void ip_update(PacingState& state, const MarketConfig& market,
               const RoundOutcome& outcome, double eps);

// The member with the highest shaded bid posts it; everyone else posts zero.
CoordinatedBids cp_bids(const PacingState& state, const RoundDraw& draw);
void cp_update(PacingState& state, const MarketConfig& market,
               const RoundOutcome& outcome, double eps);

// Internal election by pseudo-shaded bids; the winner posts her bid shaded
// by the external multiplier instead.
CoordinatedBids hp_bids(const HybridState& state, const RoundDraw& draw);

// z' of the hybrid update: the expenditure the internal bid would have
// realized, reconstructed from observables only.
Eigen::VectorXd hp_pseudo_expenditure(const CoordinatedBids& bids,
                                      const RoundOutcome& outcome);

void hp_update(HybridState& state, const MarketConfig& market,
               const CoordinatedBids& bids, const RoundOutcome& outcome,
               const Eigen::VectorXd& pseudo_expenditure, double eps);

struct RoundRecord {
  RoundDraw draw;
  RoundOutcome outcome;
  Eigen::VectorXd multiplier;      // lambda (IP/HP pseudo) or xi (CP), pre-update
  Eigen::VectorXd external;        // mu, HP only (empty otherwise)
  Eigen::VectorXd remaining;       // budget after the round
};

struct BidderSummary {
  double avg_utility = 0.0;      // sum(u) / T
  double avg_expenditure = 0.0;  // sum(z) / T
  double avg_value = 0.0;        // sum(won * v) / T
  double win_rate = 0.0;
  double final_multiplier = 0.0;       // lambda / xi
  double final_external = 0.0;         // mu (HP); 0 otherwise
  double diag_variance = 0.0;          // last-window variance of the running
                                       // average of the primary multiplier
  double diag_variance_pseudo = 0.0;   // same for HP's pseudo multiplier
  double diag_residual = 0.0;          // |avg mult * (rho - avg z)|
};

struct SimulationSummary {
  StrategyKind strategy = StrategyKind::IP;
  std::vector<BidderSummary> bidders;
  int ending_time = 0;  // last round with remaining budget >= value_hi for all
  int diagnostics_window = 0;
  double positive_projection_freq = 0.0;  // HP only
  uint64_t seed = 0;
};

struct SimulationResult {
  std::vector<RoundRecord> trace;  // empty when trace_detail == Summary
  SimulationSummary summary;
};

// Runs one full pacing simulation. Values for bidder k in round t come from
// substream (id.experiment, id.repetition, k, t) and the outside bid from
// entity K, so runs with equal seeds couple across strategies.
SimulationResult run_simulation(const MarketConfig& market, StrategyKind kind,
                                uint64_t seed, StreamId id = {},
                                int diagnostics_window = 100);

}  // namespace copa
