#pragma once

#include <Eigen/Core>
#include <span>

namespace copa {

struct RoundDraw {
  Eigen::VectorXd values;  // one per coalition member
  double outside_bid = 0.0;
  int round = 0;
};

struct RoundOutcome {
  Eigen::VectorXd bids;         // externally posted bids
  Eigen::VectorXd competing;    // highest competing bid each member faces
  Eigen::VectorXi allocation;   // 0/1, at most one nonzero
  Eigen::VectorXd expenditure;  // allocation * competing
  Eigen::VectorXd utility;      // allocation * (value - competing)
  Eigen::VectorXd internal_bids;        // empty unless the strategy has them
  Eigen::VectorXd pseudo_expenditure;   // empty unless HP
  int winner = -1;                      // -1 when the outside bid takes the slot
};

// One second-price round. The competing bid for member k is the maximum of
// the other members' posted bids and the outside bid; ties against the
// outside bid go to the member, ties between members go to the lowest index.
RoundOutcome resolve_round(const RoundDraw& draw, const Eigen::VectorXd& bids);

// True iff every member's summed expenditure stays within her budget.
bool check_feasibility(std::span<const RoundOutcome> trace,
                       const Eigen::VectorXd& budgets);

}  // namespace copa
