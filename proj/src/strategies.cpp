#include "copa/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "copa/stats.hpp"

namespace copa {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::IP: return "IP";
    case StrategyKind::CP: return "CP";
    case StrategyKind::HP: return "HP";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& name) {
  if (name == "IP") return StrategyKind::IP;
  if (name == "CP") return StrategyKind::CP;
  if (name == "HP") return StrategyKind::HP;
  throw std::invalid_argument("unknown strategy: " + name);
}

namespace {

double clamp_interval(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

int argmax_lowest(const Eigen::VectorXd& xs) {
  int best = 0;
  for (int i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[best]) best = i;
  return best;
}

}  // namespace

Eigen::VectorXd ip_bids(const PacingState& state, const RoundDraw& draw) {
  const Eigen::Index k_count = draw.values.size();
  Eigen::VectorXd bids(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    bids[k] = std::min(draw.values[k] / (1.0 + state.multiplier[k]), state.remaining[k]);
  return bids;
}

void ip_update(PacingState& state, const MarketConfig& market,
               const RoundOutcome& outcome, double eps) {
  const Eigen::VectorXd rho = market.effective_rhos();
  for (int k = 0; k < market.size(); ++k) {
    state.multiplier[k] = clamp_interval(
        state.multiplier[k] - eps * (rho[k] - outcome.expenditure[k]), 0.0,
        market.bidders[k].multiplier_cap);
    state.remaining[k] -= outcome.expenditure[k];
  }
}

CoordinatedBids cp_bids(const PacingState& state, const RoundDraw& draw) {
  const Eigen::Index k_count = draw.values.size();
  CoordinatedBids out;
  out.internal.resize(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    out.internal[k] =
        std::min(draw.values[k] / (1.0 + state.multiplier[k]), state.remaining[k]);
  out.elected = argmax_lowest(out.internal);
  out.external = Eigen::VectorXd::Zero(k_count);
  out.external[out.elected] = out.internal[out.elected];
  return out;
}

void cp_update(PacingState& state, const MarketConfig& market,
               const RoundOutcome& outcome, double eps) {
  ip_update(state, market, outcome, eps);  // same multiplier/budget recursion
}

CoordinatedBids hp_bids(const HybridState& state, const RoundDraw& draw) {
  const Eigen::Index k_count = draw.values.size();
  CoordinatedBids out;
  out.internal.resize(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    out.internal[k] =
        std::min(draw.values[k] / (1.0 + state.pseudo[k]), state.remaining[k]);
  out.elected = argmax_lowest(out.internal);
  out.external = Eigen::VectorXd::Zero(k_count);
  out.external[out.elected] =
      std::min(draw.values[out.elected] / (1.0 + state.external[out.elected]),
               state.remaining[out.elected]);
  return out;
}

Eigen::VectorXd hp_pseudo_expenditure(const CoordinatedBids& bids,
                                      const RoundOutcome& outcome) {
  const Eigen::Index k_count = bids.internal.size();
  Eigen::VectorXd out(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    double internal_rival = 0.0;
    for (Eigen::Index i = 0; i < k_count; ++i)
      if (i != k) internal_rival = std::max(internal_rival, bids.internal[i]);
    const double z = outcome.expenditure[k];
    const double alt = outcome.allocation[k] ? internal_rival : 0.0;
    out[k] = bids.internal[k] >= z ? std::max(z, alt) : 0.0;
  }
  return out;
}

void hp_update(HybridState& state, const MarketConfig& market,
               const CoordinatedBids& bids, const RoundOutcome& outcome,
               const Eigen::VectorXd& pseudo_expenditure, double eps) {
  (void)bids;
  const Eigen::VectorXd rho = market.effective_rhos();
  for (int k = 0; k < market.size(); ++k) {
    const double cap = market.bidders[k].multiplier_cap;
    state.pseudo[k] = clamp_interval(
        state.pseudo[k] - eps * (rho[k] - pseudo_expenditure[k]), 0.0, cap);
    const double raw = state.external[k] - eps * (rho[k] - outcome.expenditure[k]);
    const double projected = clamp_interval(raw, 0.0, state.pseudo[k]);
    const double error = raw - projected;
    if (error > 0.0) {
      state.positive_projection_sum += error;
      ++state.positive_projection_rounds;
    }
    state.external[k] = projected;
    state.remaining[k] -= outcome.expenditure[k];
  }
}

namespace {

// Ring buffer of the running average of one multiplier series; reports the
// variance of the values seen in the last `window` rounds.
class RunningAverageWindow {
 public:
  explicit RunningAverageWindow(int window) : window_(window) {}
  void add(double multiplier) {
    sum_ += multiplier;
    ++rounds_;
    buffer_.push_back(sum_ / double(rounds_));
    if (int(buffer_.size()) > window_) buffer_.pop_front();
  }
  double variance() const {
    RunningStat stat;
    for (double x : buffer_) stat.add(x);
    return stat.population_variance();
  }
  double final_average() const { return rounds_ ? sum_ / double(rounds_) : 0.0; }

 private:
  int window_;
  double sum_ = 0.0;
  long rounds_ = 0;
  std::deque<double> buffer_;
};

}  // namespace

SimulationResult run_simulation(const MarketConfig& market, StrategyKind kind,
                                uint64_t seed, StreamId id, int diagnostics_window) {
  market.validate();
  const int k_count = market.size();
  const int horizon = market.horizon;
  const double eps = market.step.epsilon(horizon);
  const Eigen::VectorXd rho = market.effective_rhos();
  const Eigen::VectorXd v_hi = market.value_hi();
  const Eigen::VectorXd budgets = rho * double(horizon);

  PacingState pacing{market.initial_vector(), budgets};
  HybridState hybrid{market.initial_vector(), market.initial_vector(), budgets, 0.0, 0};

  SimulationResult result;
  result.summary.strategy = kind;
  result.summary.seed = seed;
  result.summary.diagnostics_window = diagnostics_window;
  result.summary.bidders.resize(k_count);
  if (market.trace_detail == TraceDetail::Full) result.trace.reserve(horizon);

  std::vector<RunningAverageWindow> primary_avg(k_count, RunningAverageWindow(diagnostics_window));
  std::vector<RunningAverageWindow> pseudo_avg(k_count, RunningAverageWindow(diagnostics_window));
  Eigen::VectorXd total_u = Eigen::VectorXd::Zero(k_count);
  Eigen::VectorXd total_z = Eigen::VectorXd::Zero(k_count);
  Eigen::VectorXd total_v = Eigen::VectorXd::Zero(k_count);
  Eigen::VectorXi wins = Eigen::VectorXi::Zero(k_count);
  int ending_time = 0;

  RngStream base(seed, id);
  for (int t = 1; t <= horizon; ++t) {
    RoundDraw draw;
    draw.round = t;
    draw.values.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
      RngStream s = base.at({id.experiment, id.repetition, uint32_t(k), uint32_t(t)});
      draw.values[k] = market.bidders[k].value_dist.sample(s);
    }
    {
      RngStream s = base.at({id.experiment, id.repetition, uint32_t(k_count), uint32_t(t)});
      draw.outside_bid = market.outside.sample(s);
    }

    RoundOutcome outcome;
    Eigen::VectorXd multiplier_snapshot, external_snapshot;
    switch (kind) {
      case StrategyKind::IP: {
        multiplier_snapshot = pacing.multiplier;
        const Eigen::VectorXd bids = ip_bids(pacing, draw);
        outcome = resolve_round(draw, bids);
        outcome.internal_bids = bids;
        ip_update(pacing, market, outcome, eps);
        break;
      }
      case StrategyKind::CP: {
        multiplier_snapshot = pacing.multiplier;
        const CoordinatedBids bids = cp_bids(pacing, draw);
        outcome = resolve_round(draw, bids.external);
        outcome.internal_bids = bids.internal;
        cp_update(pacing, market, outcome, eps);
        break;
      }
      case StrategyKind::HP: {
        multiplier_snapshot = hybrid.pseudo;
        external_snapshot = hybrid.external;
        const CoordinatedBids bids = hp_bids(hybrid, draw);
        outcome = resolve_round(draw, bids.external);
        outcome.internal_bids = bids.internal;
        outcome.pseudo_expenditure = hp_pseudo_expenditure(bids, outcome);
        hp_update(hybrid, market, bids, outcome, outcome.pseudo_expenditure, eps);
        break;
      }
    }

    total_u += outcome.utility;
    total_z += outcome.expenditure;
    for (int k = 0; k < k_count; ++k) {
      if (outcome.allocation[k]) {
        ++wins[k];
        total_v[k] += draw.values[k];
      }
    }
    const Eigen::VectorXd& remaining =
        kind == StrategyKind::HP ? hybrid.remaining : pacing.remaining;
    if ((remaining.array() >= v_hi.array()).all()) ending_time = t;

    for (int k = 0; k < k_count; ++k) {
      switch (kind) {
        case StrategyKind::IP:
        case StrategyKind::CP:
          primary_avg[k].add(pacing.multiplier[k]);
          break;
        case StrategyKind::HP:
          primary_avg[k].add(hybrid.external[k]);
          pseudo_avg[k].add(hybrid.pseudo[k]);
          break;
      }
    }

    if (market.trace_detail == TraceDetail::Full) {
      RoundRecord rec;
      rec.draw = draw;
      rec.outcome = outcome;
      rec.multiplier = multiplier_snapshot;
      rec.external = external_snapshot;
      rec.remaining = remaining;
      result.trace.push_back(std::move(rec));
    }
  }

  for (int k = 0; k < k_count; ++k) {
    BidderSummary& b = result.summary.bidders[k];
    b.avg_utility = total_u[k] / double(horizon);
    b.avg_expenditure = total_z[k] / double(horizon);
    b.avg_value = total_v[k] / double(horizon);
    b.win_rate = double(wins[k]) / double(horizon);
    switch (kind) {
      case StrategyKind::IP:
      case StrategyKind::CP:
        b.final_multiplier = pacing.multiplier[k];
        break;
      case StrategyKind::HP:
        b.final_multiplier = hybrid.pseudo[k];
        b.final_external = hybrid.external[k];
        break;
    }
    b.diag_variance = primary_avg[k].variance();
    if (kind == StrategyKind::HP) b.diag_variance_pseudo = pseudo_avg[k].variance();
    b.diag_residual =
        std::abs(primary_avg[k].final_average() * (rho[k] - b.avg_expenditure));
  }
  result.summary.ending_time = ending_time;
  if (kind == StrategyKind::HP)
    result.summary.positive_projection_freq =
        double(hybrid.positive_projection_rounds) / double(horizon);
  return result;
}

}  // namespace copa
