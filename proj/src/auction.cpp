#include "copa/auction.hpp"

#include <stdexcept>

namespace copa {

RoundOutcome resolve_round(const RoundDraw& draw, const Eigen::VectorXd& bids) {
  const Eigen::Index k_count = draw.values.size();
  if (bids.size() != k_count)
    throw std::invalid_argument("resolve_round: bid vector does not match draw");
  for (Eigen::Index k = 0; k < k_count; ++k)
    if (!(bids[k] >= 0.0)) throw std::invalid_argument("resolve_round: negative bid");

  RoundOutcome out;
  out.bids = bids;
  out.competing.resize(k_count);
  out.allocation = Eigen::VectorXi::Zero(k_count);
  out.expenditure = Eigen::VectorXd::Zero(k_count);
  out.utility = Eigen::VectorXd::Zero(k_count);

  Eigen::Index top = 0;
  for (Eigen::Index k = 1; k < k_count; ++k)
    if (bids[k] > bids[top]) top = k;

  for (Eigen::Index k = 0; k < k_count; ++k) {
    double rival = 0.0;
    for (Eigen::Index i = 0; i < k_count; ++i)
      if (i != k && bids[i] > rival) rival = bids[i];
    out.competing[k] = std::max(rival, draw.outside_bid);
  }

  if (k_count > 0 && bids[top] >= out.competing[top]) {
    out.winner = int(top);
    out.allocation[top] = 1;
    out.expenditure[top] = out.competing[top];
    out.utility[top] = draw.values[top] - out.competing[top];
  }
  return out;
}

bool check_feasibility(std::span<const RoundOutcome> trace,
                       const Eigen::VectorXd& budgets) {
  Eigen::VectorXd spent = Eigen::VectorXd::Zero(budgets.size());
  for (const auto& round : trace) {
    if (round.expenditure.size() != budgets.size())
      throw std::invalid_argument("check_feasibility: dimension mismatch");
    spent += round.expenditure;
  }
  return (spent.array() <= budgets.array()).all();
}

}  // namespace copa
