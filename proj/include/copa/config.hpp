#pragma once

#include <optional>
#include <string>
#include <vector>

#include "copa/equilibrium.hpp"
#include "copa/market.hpp"
#include "copa/strategies.hpp"

namespace copa {

struct SweepSpec {
  std::vector<double> rho_grid;
  int repetitions = 1;
  uint64_t seed = 1;
  std::vector<StrategyKind> strategies;
  // When set, per-bidder rates are drawn from N(rho_bar, rho_noise_sd)
  // truncated into (0.01, 0.99 * value_hi), fresh per repetition.
  std::optional<double> rho_noise_sd;
};

struct MisreportSpec {
  int deviator = 0;
  double reported_rho = 0.0;
  int repetitions = 1;
  uint64_t seed = 1;
};

struct CounterexampleSpec {
  double p = 0.1;
  double eta = 0.1;
  int repetitions = 100;
  uint64_t seed = 1;
  int horizon = 20000;
  int curve_stride = 100;  // sampling stride of the utility curves
};

struct EquilibriumSpec {
  std::vector<Family> families;
  double tolerance = 1e-3;
  int max_iter = 20000;
  EstimationMethod method;
  std::optional<double> gamma_hint;
};

struct MonotonicitySpec {
  Family family = Family::IP;
  double grid_width = 0.003;
  Eigen::VectorXd box_lo, box_hi;
  PairPolicy policy = PairPolicy::AxisAdjacent;
  int sampled_pairs = 100000;
  EstimationMethod method;
};

struct HindsightSpec {
  int rounds = 10;
  uint64_t seed = 1;
  int dual_samples = 100000;
  int dual_iterations = 4000;
};

struct IngestSpec {
  std::string csv_path;
  int coalition_size = 1;
  uint64_t seed = 1;
};

struct SimulateSpec {
  StrategyKind strategy = StrategyKind::IP;
  uint64_t seed = 1;
  bool write_trace = true;
};

// One scenario file describes the market plus whichever operation sections
// the invocation needs. Unknown keys anywhere are rejected.
struct Scenario {
  std::optional<MarketConfig> market;
  std::optional<SimulateSpec> simulate;
  std::optional<SweepSpec> sweep;
  std::optional<MisreportSpec> misreport;
  std::optional<CounterexampleSpec> counterexample;
  std::optional<EquilibriumSpec> equilibrium;
  std::optional<MonotonicitySpec> monotonicity;
  std::optional<HindsightSpec> hindsight;
  std::optional<IngestSpec> ingest;
  std::string scenario_hash;  // stable digest of the file contents
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario load_scenario(const std::string& path);
Distribution distribution_from_json_text(const std::string& text);

}  // namespace copa
