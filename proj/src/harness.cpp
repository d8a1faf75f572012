#include "copa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace copa {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

// Per-bidder rho draws for one repetition when the sweep perturbs budgets:
// N(rho_bar, sd) truncated into (0.01, 0.99 * value_hi).
double draw_rho(double rho_bar, double sd, double value_hi, RngStream& rng) {
  const double lo = 0.01;
  const double hi = 0.99 * value_hi;
  const Distribution law = Distribution::truncated_gaussian(
      rho_bar, sd, std::min(lo, hi * 0.5), hi);
  const double x = law.sample(rng);
  return std::max(lo, std::min(x, hi));
}

}  // namespace

SweepResult run_sweep(const MarketConfig& base, const SweepSpec& spec, int threads) {
  base.validate();
  const int k_count = base.size();
  const int cells = int(spec.rho_grid.size()) * spec.repetitions;

  struct Cell {
    std::vector<std::vector<SweepRow>> by_strategy;
  };
  std::vector<Cell> cells_out(cells);

  parallel_for(cells, threads, [&](int cell) {
    const int rho_index = cell / spec.repetitions;
    const int rep = cell % spec.repetitions;
    const double rho_bar = spec.rho_grid[rho_index];

    MarketConfig market = base;
    for (int k = 0; k < k_count; ++k) {
      const double v_hi = market.bidders[k].value_dist.support_hi();
      double rho = rho_bar;
      if (spec.rho_noise_sd) {
        RngStream rng(spec.seed, {uint32_t(1000 + rho_index), uint32_t(rep),
                                  uint32_t(k), 0});
        rho = draw_rho(rho_bar, *spec.rho_noise_sd, v_hi, rng);
      }
      rho = std::min(rho, 0.995 * v_hi);
      market.bidders[k].rho = rho;
      market.bidders[k].multiplier_cap =
          std::max(market.bidders[k].multiplier_cap, v_hi / rho);
    }

    Cell& out = cells_out[cell];
    out.by_strategy.resize(spec.strategies.size());
    for (size_t s = 0; s < spec.strategies.size(); ++s) {
      const StrategyKind kind = spec.strategies[s];
      // Strategy stays out of the stream coordinates: coupled draws.
      const SimulationResult sim = run_simulation(
          market, kind, spec.seed, {uint32_t(rho_index), uint32_t(rep), 0, 0});
      for (int k = 0; k < k_count; ++k) {
        const BidderSummary& b = sim.summary.bidders[k];
        out.by_strategy[s].push_back({kind, rho_bar, rep, k, b.avg_utility,
                                      b.avg_expenditure, b.win_rate,
                                      kind == StrategyKind::HP ? b.final_external
                                                               : b.final_multiplier,
                                      b.diag_variance, b.diag_residual, spec.seed});
      }
    }
  });

  SweepResult result;
  for (size_t s = 0; s < spec.strategies.size(); ++s)
    for (int cell = 0; cell < cells; ++cell)
      for (const auto& row : cells_out[cell].by_strategy[s])
        result.rows.push_back(row);
  return result;
}

CsvTable sweep_table(const SweepResult& result) {
  CsvTable table;
  table.header = {"strategy",       "rho",           "repetition",
                  "bidder",         "avg_utility",   "avg_expenditure",
                  "win_rate",       "final_multiplier", "diag_variance",
                  "diag_residual",  "seed",          "scenario_hash"};
  for (const auto& r : result.rows) {
    table.rows.push_back({to_string(r.strategy), format_double(r.rho_bar),
                          std::to_string(r.repetition), std::to_string(r.bidder),
                          format_double(r.avg_utility),
                          format_double(r.avg_expenditure),
                          format_double(r.win_rate),
                          format_double(r.final_multiplier),
                          format_double(r.diag_variance),
                          format_double(r.diag_residual), std::to_string(r.seed),
                          result.scenario_hash});
  }
  return table;
}

MarketConfig counterexample_market(const CounterexampleSpec& spec) {
  const double cap = 3.0;
  MarketConfig market{
      {{Distribution::mixture({spec.p, 1.0 - spec.p},
                              {Distribution::uniform(0.0, 1.0),
                               Distribution::uniform(1.0, 1.0 + spec.eta)}),
        (1.0 + spec.eta) / cap, cap, std::nullopt},
       {Distribution::uniform(0.0, 1.0), 1.0 / cap, cap, std::nullopt}},
      Distribution::point_mass(0.0),
      spec.horizon,
      StepSchedule::inverse_sqrt(0.1),
      Eigen::VectorXd::Zero(2),
      TraceDetail::Full};
  return market;
}

CounterexampleResult run_counterexample(const CounterexampleSpec& spec, int threads) {
  const MarketConfig market = counterexample_market(spec);
  const std::vector<StrategyKind> strategies = {StrategyKind::IP, StrategyKind::CP,
                                                StrategyKind::HP};
  const int k_count = market.size();
  const int reps = spec.repetitions;
  const int points = market.horizon / spec.curve_stride;

  // curve_sums[s][k][p] accumulates running Pi/T across repetitions
  struct PerRep {
    std::vector<std::vector<std::vector<double>>> curve;  // [s][k][p]
    std::vector<std::vector<double>> final_u;             // [s][k]
  };
  std::vector<PerRep> per_rep(reps);

  parallel_for(reps, threads, [&](int rep) {
    PerRep& out = per_rep[rep];
    out.curve.assign(strategies.size(),
                     std::vector<std::vector<double>>(
                         k_count, std::vector<double>(points, 0.0)));
    out.final_u.assign(strategies.size(), std::vector<double>(k_count, 0.0));
    for (size_t s = 0; s < strategies.size(); ++s) {
      const SimulationResult sim =
          run_simulation(market, strategies[s], spec.seed, {0, uint32_t(rep), 0, 0});
      Eigen::VectorXd cum = Eigen::VectorXd::Zero(k_count);
      int point = 0;
      for (int t = 0; t < market.horizon; ++t) {
        cum += sim.trace[t].outcome.utility;
        if ((t + 1) % spec.curve_stride == 0 && point < points) {
          for (int k = 0; k < k_count; ++k)
            out.curve[s][k][point] = cum[k] / double(t + 1);
          ++point;
        }
      }
      for (int k = 0; k < k_count; ++k)
        out.final_u[s][k] = sim.summary.bidders[k].avg_utility;
    }
  });

  CounterexampleResult result;
  result.strategies = strategies;
  result.curves.assign(strategies.size(),
                       std::vector<std::vector<CurvePoint>>(k_count));
  result.final_utility.assign(strategies.size(), std::vector<MeanSe>(k_count));
  result.samples.assign(strategies.size(),
                        std::vector<std::vector<double>>(k_count));
  for (size_t s = 0; s < strategies.size(); ++s) {
    for (int k = 0; k < k_count; ++k) {
      std::vector<double> finals(reps);
      for (int rep = 0; rep < reps; ++rep) finals[rep] = per_rep[rep].final_u[s][k];
      result.final_utility[s][k] = mean_and_se(finals);
      result.samples[s][k] = std::move(finals);
      result.curves[s][k].resize(points);
      for (int p = 0; p < points; ++p) {
        std::vector<double> xs(reps);
        for (int rep = 0; rep < reps; ++rep) xs[rep] = per_rep[rep].curve[s][k][p];
        const MeanSe ms = mean_and_se(xs);
        result.curves[s][k][p] = {(p + 1) * spec.curve_stride, ms.mean, ms.se};
      }
    }
  }
  return result;
}

MisreportResult run_misreport(const MarketConfig& base, const MisreportSpec& spec,
                              const EstimationMethod& method, int threads) {
  base.validate();
  const int k_count = base.size();
  if (spec.deviator < 0 || spec.deviator >= k_count)
    throw std::invalid_argument("misreport: deviator index out of range");
  if (!(spec.reported_rho > 0.0) ||
      !(spec.reported_rho <= base.bidders[spec.deviator].rho))
    throw std::invalid_argument("misreport: reported rho must lie in (0, rho]");

  MarketConfig misreported = base;
  misreported.bidders[spec.deviator].reported_rho = spec.reported_rho;
  misreported.bidders[spec.deviator].multiplier_cap =
      std::max(misreported.bidders[spec.deviator].multiplier_cap,
               misreported.bidders[spec.deviator].value_dist.support_hi() /
                   spec.reported_rho);
  misreported.validate();

  struct RepOut {
    std::vector<double> du, dv;
  };
  std::vector<RepOut> reps(spec.repetitions);
  parallel_for(spec.repetitions, threads, [&](int rep) {
    const StreamId id{0, uint32_t(rep), 0, 0};
    const SimulationResult truthful =
        run_simulation(base, StrategyKind::IP, spec.seed, id);
    const SimulationResult deviated =
        run_simulation(misreported, StrategyKind::IP, spec.seed, id);
    RepOut& out = reps[rep];
    out.du.resize(k_count);
    out.dv.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
      out.du[k] = deviated.summary.bidders[k].avg_utility -
                  truthful.summary.bidders[k].avg_utility;
      out.dv[k] = deviated.summary.bidders[k].avg_value -
                  truthful.summary.bidders[k].avg_value;
    }
  });

  MisreportResult result;
  result.delta_utility.resize(k_count);
  result.delta_value.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    std::vector<double> du(spec.repetitions), dv(spec.repetitions);
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      du[rep] = reps[rep].du[k];
      dv[rep] = reps[rep].dv[k];
    }
    result.delta_utility[k] = mean_and_se(du);
    result.delta_value[k] = mean_and_se(dv);
  }

  const EquilibriumResult truth_eq =
      solve_ncp(Family::IP, base, method, 1e-4, 60000);
  const EquilibriumResult dev_eq =
      solve_ncp(Family::IP, misreported, method, 1e-4, 60000);
  result.truthful_multiplier = truth_eq.multipliers;
  result.misreport_multiplier = dev_eq.multipliers;
  return result;
}

}  // namespace copa
