#pragma once

#include <functional>
#include <string>
#include <vector>

#include "copa/config.hpp"
#include "copa/csv.hpp"
#include "copa/equilibrium.hpp"
#include "copa/market.hpp"
#include "copa/stats.hpp"
#include "copa/strategies.hpp"

namespace copa {

// Deterministic parallel map: body(i) runs for i in [0, n), fanned out over
// `threads` workers; results must be written to preallocated slots so the
// outcome is identical for any thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

struct SweepRow {
  StrategyKind strategy;
  double rho_bar;
  int repetition;
  int bidder;
  double avg_utility;
  double avg_expenditure;
  double win_rate;
  double final_multiplier;
  double diag_variance;
  double diag_residual;
  uint64_t seed;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (strategy, rho, repetition, bidder)
  std::string scenario_hash;
};

// Runs every (strategy, rho, repetition) cell; draws are coupled across
// strategies within a cell (identical seeds and substreams).
SweepResult run_sweep(const MarketConfig& base, const SweepSpec& spec,
                      int threads = 0);

CsvTable sweep_table(const SweepResult& result);

struct CurvePoint {
  int round;
  double mean;  // average across repetitions of the running Pi/T
  double se;
};

struct CounterexampleResult {
  // [strategy][bidder] -> utility curve over rounds
  std::vector<std::vector<std::vector<CurvePoint>>> curves;
  // [strategy][bidder] final Pi/T across repetitions
  std::vector<std::vector<MeanSe>> final_utility;
  // paired per-repetition samples for delta tests: [strategy][bidder][rep]
  std::vector<std::vector<std::vector<double>>> samples;
  std::vector<StrategyKind> strategies;
};

// The two-bidder counterexample: bidder 1's value is U[0,1] w.p. p and
// U[1,1+eta] otherwise, bidder 2's is U[0,1], the outside bid is always 0,
// caps 3.0, rho_i = value_hi_i / cap, step 0.1 / sqrt(T).
CounterexampleResult run_counterexample(const CounterexampleSpec& spec,
                                        int threads = 0);
MarketConfig counterexample_market(const CounterexampleSpec& spec);

struct MisreportResult {
  // Per-bidder deltas (misreport minus truthful), paired across coupled seeds.
  std::vector<MeanSe> delta_utility;
  std::vector<MeanSe> delta_value;
  Eigen::VectorXd truthful_multiplier;    // solved lambda* under truth
  Eigen::VectorXd misreport_multiplier;   // solved lambda* under the misreport
};

MisreportResult run_misreport(const MarketConfig& base, const MisreportSpec& spec,
                              const EstimationMethod& method, int threads = 0);

}  // namespace copa
