#include "copa/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "copa/config.hpp"
#include "copa/diagnostics.hpp"
#include "copa/harness.hpp"
#include "copa/hindsight.hpp"
#include "copa/ingest.hpp"
#include "copa/svg.hpp"

namespace copa {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::string metric = "avg_utility";
  std::string group_by = "strategy";
  int window = 100;
  int threads = 0;
  int verbosity = 0;
};

fs::path resolve_out_dir(const CommonArgs& args) {
  std::string dir = args.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("COPA_OUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

void manifest(const fs::path& path) { std::cout << "wrote " << path.string() << "\n"; }

const MarketConfig& require_market(const Scenario& scenario) {
  if (!scenario.market) throw ConfigError("config: scenario needs a 'market' section");
  return *scenario.market;
}

CsvTable summary_rows(const SimulationSummary& summary, const MarketConfig& market,
                      const std::string& hash) {
  SweepResult as_sweep;
  as_sweep.scenario_hash = hash;
  for (int k = 0; k < market.size(); ++k) {
    const BidderSummary& b = summary.bidders[k];
    as_sweep.rows.push_back({summary.strategy, market.bidders[k].rho, 0, k,
                             b.avg_utility, b.avg_expenditure, b.win_rate,
                             summary.strategy == StrategyKind::HP
                                 ? b.final_external
                                 : b.final_multiplier,
                             b.diag_variance, b.diag_residual, summary.seed});
  }
  return sweep_table(as_sweep);
}

int cmd_simulate(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  MarketConfig market = require_market(scenario);
  SimulateSpec spec = scenario.simulate.value_or(SimulateSpec{});
  if (args.seed) spec.seed = *args.seed;
  if (spec.write_trace) market.trace_detail = TraceDetail::Full;

  const SimulationResult sim =
      run_simulation(market, spec.strategy, spec.seed, {}, args.window);
  const fs::path out = resolve_out_dir(args);
  if (!sim.trace.empty()) {
    write_trace_csv((out / "trace.csv").string(), sim.trace, spec.strategy);
    manifest(out / "trace.csv");
  }
  write_csv((out / "summary.csv").string(),
            summary_rows(sim.summary, market, scenario.scenario_hash));
  manifest(out / "summary.csv");
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  const MarketConfig& market = require_market(scenario);
  if (!scenario.sweep) throw ConfigError("config: scenario needs a 'sweep' section");
  SweepSpec spec = *scenario.sweep;
  if (args.seed) spec.seed = *args.seed;
  SweepResult result = run_sweep(market, spec, args.threads);
  result.scenario_hash = scenario.scenario_hash;
  const fs::path out = resolve_out_dir(args);
  write_csv((out / "summary.csv").string(), sweep_table(result));
  manifest(out / "summary.csv");
  return 0;
}

int cmd_counterexample(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  if (!scenario.counterexample)
    throw ConfigError("config: scenario needs a 'counterexample' section");
  CounterexampleSpec spec = *scenario.counterexample;
  if (args.seed) spec.seed = *args.seed;
  const CounterexampleResult result = run_counterexample(spec, args.threads);

  CsvTable curves;
  curves.header = {"strategy", "bidder", "round", "avg_utility", "se"};
  CsvTable finals;
  finals.header = {"strategy", "bidder", "avg_utility", "se"};
  for (size_t s = 0; s < result.strategies.size(); ++s) {
    const std::string name = to_string(result.strategies[s]);
    for (size_t k = 0; k < result.curves[s].size(); ++k) {
      for (const auto& p : result.curves[s][k])
        curves.rows.push_back({name, std::to_string(k), std::to_string(p.round),
                               format_double(p.mean), format_double(p.se)});
      finals.rows.push_back({name, std::to_string(k),
                             format_double(result.final_utility[s][k].mean),
                             format_double(result.final_utility[s][k].se)});
    }
  }
  const fs::path out = resolve_out_dir(args);
  write_csv((out / "counterexample_curves.csv").string(), curves);
  manifest(out / "counterexample_curves.csv");
  write_csv((out / "counterexample_summary.csv").string(), finals);
  manifest(out / "counterexample_summary.csv");
  return 0;
}

int cmd_misreport(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  const MarketConfig& market = require_market(scenario);
  if (!scenario.misreport)
    throw ConfigError("config: scenario needs a 'misreport' section");
  MisreportSpec spec = *scenario.misreport;
  if (args.seed) spec.seed = *args.seed;
  const EstimationMethod method = scenario.equilibrium
                                      ? scenario.equilibrium->method
                                      : EstimationMethod::monte_carlo(100000, 7);
  const MisreportResult result = run_misreport(market, spec, method, args.threads);

  CsvTable table;
  table.header = {"bidder",         "delta_utility", "delta_utility_se",
                  "delta_value",    "delta_value_se", "truthful_multiplier",
                  "misreport_multiplier"};
  for (int k = 0; k < market.size(); ++k) {
    table.rows.push_back({std::to_string(k),
                          format_double(result.delta_utility[k].mean),
                          format_double(result.delta_utility[k].se),
                          format_double(result.delta_value[k].mean),
                          format_double(result.delta_value[k].se),
                          format_double(result.truthful_multiplier[k]),
                          format_double(result.misreport_multiplier[k])});
  }
  const fs::path out = resolve_out_dir(args);
  write_csv((out / "misreport.csv").string(), table);
  manifest(out / "misreport.csv");
  return 0;
}

int cmd_equilibrium(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  const MarketConfig& market = require_market(scenario);
  EquilibriumSpec spec = scenario.equilibrium.value_or(EquilibriumSpec{
      {Family::IP, Family::CP, Family::HP}, 1e-3, 20000, EstimationMethod{}, {}});
  if (args.seed) spec.method.seed = *args.seed;

  CsvTable table;
  table.header = {"family", "bidder", "multiplier", "residual", "slack",
                  "iterations"};
  EquilibriumResult ip_result;
  bool have_ip = false;
  for (Family family : spec.families) {
    if (family == Family::HP) continue;
    const EquilibriumResult r = solve_ncp(family, market, spec.method,
                                          spec.tolerance, spec.max_iter,
                                          spec.gamma_hint);
    if (family == Family::IP) {
      ip_result = r;
      have_ip = true;
    }
    for (int k = 0; k < market.size(); ++k)
      table.rows.push_back({to_string(family), std::to_string(k),
                            format_double(r.multipliers[k]),
                            format_double(r.residual[k]), format_double(r.slack[k]),
                            std::to_string(r.iterations)});
  }
  for (Family family : spec.families) {
    if (family != Family::HP) continue;
    if (!have_ip) {
      ip_result = solve_ncp(Family::IP, market, spec.method, spec.tolerance,
                            spec.max_iter, spec.gamma_hint);
      have_ip = true;
    }
    const EquilibriumResult r = solve_hp_equilibrium(
        market, ip_result.multipliers, spec.method, spec.tolerance);
    for (int k = 0; k < market.size(); ++k)
      table.rows.push_back({to_string(family), std::to_string(k),
                            format_double(r.external[k]),
                            format_double(r.residual[k]), format_double(r.slack[k]),
                            std::to_string(r.iterations)});
  }
  const fs::path out = resolve_out_dir(args);
  write_csv((out / "equilibria.csv").string(), table);
  manifest(out / "equilibria.csv");
  return 0;
}

int cmd_monotonicity(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  const MarketConfig& market = require_market(scenario);
  if (!scenario.monotonicity)
    throw ConfigError("config: scenario needs a 'monotonicity' section");
  const MonotonicitySpec& spec = *scenario.monotonicity;
  const ExpenditureMap map = make_expenditure_map(spec.family, market, spec.method);
  const MonotonicityReport report =
      check_monotonicity(map, spec.box_lo, spec.box_hi, spec.grid_width,
                         spec.policy, spec.sampled_pairs, spec.method.seed);
  CsvTable table;
  table.header = {"family", "grid_width", "gamma_hat"};
  table.rows.push_back({to_string(spec.family), format_double(report.grid_width),
                        format_double(report.gamma_hat)});
  const fs::path out = resolve_out_dir(args);
  write_csv((out / "monotonicity.csv").string(), table);
  manifest(out / "monotonicity.csv");
  std::cout << "gamma_hat " << format_double(report.gamma_hat) << "\n";
  return 0;
}

int cmd_hindsight(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  const MarketConfig& market = require_market(scenario);
  const HindsightSpec spec = scenario.hindsight.value_or(HindsightSpec{});
  const uint64_t seed = args.seed.value_or(spec.seed);

  const HindsightInstance instance = draw_instance(market, spec.rounds, seed);
  CsvTable table;
  table.header = {"rounds", "exact_welfare", "dual_value_per_round", "dual_mu"};
  std::string exact = "";
  if (market.size() <= 3 && spec.rounds <= 20)
    exact = format_double(hindsight_exact(instance).welfare);
  const SampleCache cache(market, spec.dual_samples, seed + 1);
  const DualSolution dual = minimize_dual(market, cache, spec.dual_iterations);
  std::string mu_text;
  for (int k = 0; k < market.size(); ++k)
    mu_text += (k ? ";" : "") + format_double(dual.mu[k]);
  table.rows.push_back(
      {std::to_string(spec.rounds), exact, format_double(dual.value), mu_text});
  const fs::path out = resolve_out_dir(args);
  write_csv((out / "hindsight.csv").string(), table);
  manifest(out / "hindsight.csv");
  return 0;
}

int cmd_ingest(const CommonArgs& args) {
  Scenario scenario = load_scenario(args.config);
  if (!scenario.ingest) throw ConfigError("config: scenario needs an 'ingest' section");
  IngestSpec spec = *scenario.ingest;
  if (args.seed) spec.seed = *args.seed;
  const IngestResult result =
      ingest_bid_log(spec.csv_path, spec.coalition_size, spec.seed);

  const fs::path out = resolve_out_dir(args);
  std::ofstream file(out / "empirical.json");
  file << "[";
  for (size_t k = 0; k < result.value_dists.size(); ++k) {
    if (k) file << ",";
    file << "\n  [";
    // Round-trip through the sorted sample list held by the sampler.
    const auto& body = std::get<dist::Empirical>(result.value_dists[k].body());
    for (size_t i = 0; i < body.sorted->size(); ++i) {
      if (i) file << ",";
      file << format_double((*body.sorted)[i]);
    }
    file << "]";
  }
  file << "\n]\n";
  if (!file) throw std::runtime_error("failed writing empirical.json");
  manifest(out / "empirical.json");
  std::cout << "records used " << result.records_used << ", skipped "
            << result.records_skipped << "\n";
  return 0;
}

int cmd_plot(const CommonArgs& args, const std::string& csv_path) {
  const CsvTable table = read_csv(csv_path);
  ChartOptions options;
  options.metric = args.metric;
  options.group_by = args.group_by;
  options.title = args.metric;
  const std::string svg = render_chart(table, options);
  const fs::path out = resolve_out_dir(args);
  const fs::path path = out / (args.metric + ".svg");
  std::ofstream file(path);
  file << svg;
  if (!file) throw std::runtime_error("failed writing chart");
  manifest(path);
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"budget-pacing auction simulator and equilibrium toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string plot_input;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* config = cmd->add_option("--config", args.config, "scenario config file");
    if (needs_config) config->required();
    cmd->add_option("--out", args.out_dir,
                    "output directory (default $COPA_OUT_DIR or .)");
    cmd->add_option("--seed", args.seed, "override the scenario seed");
    cmd->add_option("--window", args.window, "diagnostics window length");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
    cmd->add_flag("-v,--verbose", args.verbosity, "verbose progress output");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one pacing simulation");
  add_common(simulate, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run a target-rate sweep");
  add_common(sweep, true);
  CLI::App* counterexample =
      app.add_subcommand("counterexample", "run the asymmetric two-bidder example");
  add_common(counterexample, true);
  CLI::App* misreport =
      app.add_subcommand("misreport", "compare truthful vs under-reported budgets");
  add_common(misreport, true);
  CLI::App* equilibrium =
      app.add_subcommand("equilibrium", "solve the pacing equilibria");
  add_common(equilibrium, true);
  CLI::App* monotonicity =
      app.add_subcommand("monotonicity", "estimate the monotone parameter");
  add_common(monotonicity, true);
  CLI::App* hindsight =
      app.add_subcommand("hindsight", "hindsight welfare and its dual bound");
  add_common(hindsight, true);
  CLI::App* ingest = app.add_subcommand("ingest", "build empirical value laws");
  add_common(ingest, true);
  CLI::App* plot = app.add_subcommand("plot", "render an SVG chart from a summary");
  add_common(plot, false);
  plot->add_option("input", plot_input, "summary csv")->required();
  plot->add_option("--metric", args.metric, "metric column");
  plot->add_option("--group-by", args.group_by, "grouping column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (counterexample->parsed()) return cmd_counterexample(args);
    if (misreport->parsed()) return cmd_misreport(args);
    if (equilibrium->parsed()) return cmd_equilibrium(args);
    if (monotonicity->parsed()) return cmd_monotonicity(args);
    if (hindsight->parsed()) return cmd_hindsight(args);
    if (ingest->parsed()) return cmd_ingest(args);
    if (plot->parsed()) return cmd_plot(args, plot_input);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace copa
