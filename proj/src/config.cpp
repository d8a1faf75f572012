#include "copa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "copa/rng.hpp"

namespace copa {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      fail("unknown key '" + it.key() + "' in " + where);
  }
}

double number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail(where + " is missing '" + key + "'");
  if (!obj[key].is_number()) fail(where + "." + key + " must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

std::vector<double> samples_from_file(const std::string& path, int index);

Distribution parse_distribution(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind")) fail(where + " needs a 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "uniform") {
      expect_keys(j, where, {"kind", "a", "b"});
      return Distribution::uniform(number(j, where, "a"), number(j, where, "b"));
    }
    if (kind == "truncated-gaussian") {
      expect_keys(j, where, {"kind", "mean", "sd", "lo", "hi"});
      return Distribution::truncated_gaussian(
          number(j, where, "mean"), number(j, where, "sd"), number(j, where, "lo"),
          number(j, where, "hi"));
    }
    if (kind == "piecewise-uniform") {
      expect_keys(j, where, {"kind", "pieces"});
      std::vector<dist::Piece> pieces;
      for (const auto& p : j.at("pieces")) {
        expect_keys(p, where + ".pieces[]", {"lo", "hi", "weight"});
        pieces.push_back({number(p, where, "lo"), number(p, where, "hi"),
                          number(p, where, "weight")});
      }
      return Distribution::piecewise_uniform(std::move(pieces));
    }
    if (kind == "exponential-truncated") {
      expect_keys(j, where, {"kind", "rate", "hi"});
      return Distribution::exponential_truncated(number(j, where, "rate"),
                                                 number(j, where, "hi"));
    }
    if (kind == "power-law-truncated") {
      expect_keys(j, where, {"kind", "exponent", "lo", "hi"});
      return Distribution::power_law_truncated(number(j, where, "exponent"),
                                               number(j, where, "lo"),
                                               number(j, where, "hi"));
    }
    if (kind == "mixture") {
      expect_keys(j, where, {"kind", "components"});
      std::vector<double> weights;
      std::vector<Distribution> parts;
      for (const auto& c : j.at("components")) {
        expect_keys(c, where + ".components[]", {"weight", "dist"});
        weights.push_back(number(c, where, "weight"));
        parts.push_back(parse_distribution(c.at("dist"), where + ".components[]"));
      }
      return Distribution::mixture(std::move(weights), std::move(parts));
    }
    if (kind == "affine-combination") {
      expect_keys(j, where, {"kind", "terms"});
      std::vector<double> coef;
      std::vector<Distribution> parts;
      for (const auto& c : j.at("terms")) {
        expect_keys(c, where + ".terms[]", {"coef", "dist"});
        coef.push_back(number(c, where, "coef"));
        parts.push_back(parse_distribution(c.at("dist"), where + ".terms[]"));
      }
      return Distribution::affine_combination(std::move(coef), std::move(parts));
    }
    if (kind == "point-mass") {
      expect_keys(j, where, {"kind", "value"});
      return Distribution::point_mass(number(j, where, "value"));
    }
    if (kind == "empirical") {
      expect_keys(j, where, {"kind", "samples", "file", "index"});
      if (j.contains("samples"))
        return Distribution::empirical(j["samples"].get<std::vector<double>>());
      if (!j.contains("file")) fail(where + " empirical needs 'samples' or 'file'");
      const int index = j.contains("index") ? j["index"].get<int>() : 0;
      return Distribution::empirical(
          samples_from_file(j["file"].get<std::string>(), index));
    }
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
  fail(where + " has unknown distribution kind '" + kind + "'");
}

std::vector<double> samples_from_file(const std::string& path, int index) {
  std::ifstream in(path);
  if (!in) fail("cannot open empirical sample file: " + path);
  json j;
  in >> j;
  if (!j.is_array() || index < 0 || index >= int(j.size()))
    fail("empirical sample file " + path + " has no entry " + std::to_string(index));
  return j[index].get<std::vector<double>>();
}

MarketConfig parse_market(const json& j) {
  expect_keys(j, "market",
              {"bidders", "outside", "horizon", "step", "initial_multipliers",
               "trace_detail"});
  MarketConfig market{
      {}, parse_distribution(j.at("outside"), "market.outside"), 1,
      StepSchedule{1.0}, Eigen::VectorXd(), TraceDetail::Summary};
  if (!j.contains("bidders") || !j["bidders"].is_array() || j["bidders"].empty())
    fail("market.bidders must be a nonempty array");
  for (const auto& b : j["bidders"]) {
    expect_keys(b, "market.bidders[]", {"value", "rho", "cap", "reported_rho"});
    BidderSpec spec{parse_distribution(b.at("value"), "market.bidders[].value"),
                    number(b, "market.bidders[]", "rho"),
                    number(b, "market.bidders[]", "cap"), std::nullopt};
    if (b.contains("reported_rho"))
      spec.reported_rho = b["reported_rho"].get<double>();
    market.bidders.push_back(std::move(spec));
  }
  market.horizon = int(number(j, "market", "horizon"));
  if (j.contains("step")) {
    expect_keys(j["step"], "market.step", {"kind", "c"});
    const std::string kind = j["step"].value("kind", "inverse-sqrt");
    if (kind != "inverse-sqrt") fail("market.step.kind must be 'inverse-sqrt'");
    market.step = StepSchedule::inverse_sqrt(number(j["step"], "market.step", "c"));
  }
  if (j.contains("initial_multipliers")) {
    const auto& init = j["initial_multipliers"];
    if (init.is_number()) {
      market.initial_multipliers = Eigen::VectorXd::Constant(1, init.get<double>());
    } else {
      const auto xs = init.get<std::vector<double>>();
      market.initial_multipliers =
          Eigen::Map<const Eigen::VectorXd>(xs.data(), xs.size());
    }
  }
  if (j.contains("trace_detail")) {
    const std::string detail = j["trace_detail"].get<std::string>();
    if (detail == "full")
      market.trace_detail = TraceDetail::Full;
    else if (detail == "summary")
      market.trace_detail = TraceDetail::Summary;
    else
      fail("market.trace_detail must be 'full' or 'summary'");
  }
  try {
    market.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return market;
}

EstimationMethod parse_method(const json& j, const std::string& where) {
  expect_keys(j, where, {"kind", "samples", "tolerance", "seed"});
  EstimationMethod method;
  const std::string kind = j.value("kind", "monte-carlo");
  if (kind == "monte-carlo") {
    method = EstimationMethod::monte_carlo(int(number_or(j, "samples", 100000)),
                                           uint64_t(number_or(j, "seed", 1)));
  } else if (kind == "quadrature") {
    method = EstimationMethod::quadrature(number_or(j, "tolerance", 1e-9));
  } else {
    fail(where + ".kind must be 'monte-carlo' or 'quadrature'");
  }
  return method;
}

std::vector<StrategyKind> parse_strategies(const json& j) {
  std::vector<StrategyKind> out;
  for (const auto& s : j) out.push_back(strategy_from_string(s.get<std::string>()));
  if (out.empty()) fail("strategies must be nonempty");
  return out;
}

std::vector<double> parse_rho_grid(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  expect_keys(j, "sweep.rho_grid", {"start", "step", "count"});
  const double start = number(j, "sweep.rho_grid", "start");
  const double step = number(j, "sweep.rho_grid", "step");
  const int count = int(number(j, "sweep.rho_grid", "count"));
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = start + i * step;
  return grid;
}

Family family_from_string(const std::string& name) {
  if (name == "IP") return Family::IP;
  if (name == "CP") return Family::CP;
  if (name == "HP") return Family::HP;
  fail("unknown family: " + name);
}

}  // namespace

namespace {
Scenario parse_scenario(const json& j, const std::string& text);
}

Distribution distribution_from_json_text(const std::string& text) {
  return parse_distribution(json::parse(text), "distribution");
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("parse error: ") + e.what());
  }

  try {
    return parse_scenario(j, text);
  } catch (const json::exception& e) {
    fail(std::string("schema error: ") + e.what());
  }
}

namespace {
Scenario parse_scenario(const json& j, const std::string& text) {
  expect_keys(j, "scenario",
              {"market", "simulate", "sweep", "misreport", "counterexample",
               "equilibrium", "monotonicity", "hindsight", "ingest"});

  Scenario sc;
  {
    uint64_t h = 1469598103934665603ull;  // FNV-1a over the raw file bytes
    for (unsigned char c : text) h = (h ^ c) * 1099511628211ull;
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    sc.scenario_hash = buf;
  }

  if (j.contains("market")) sc.market = parse_market(j["market"]);

  if (j.contains("simulate")) {
    const auto& s = j["simulate"];
    expect_keys(s, "simulate", {"strategy", "seed", "trace"});
    SimulateSpec spec;
    spec.strategy = strategy_from_string(s.value("strategy", "IP"));
    spec.seed = uint64_t(number_or(s, "seed", 1));
    spec.write_trace = s.value("trace", true);
    sc.simulate = spec;
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    expect_keys(s, "sweep",
                {"rho_grid", "repetitions", "seed", "strategies", "rho_noise_sd"});
    SweepSpec spec;
    if (!s.contains("rho_grid")) fail("sweep needs rho_grid");
    spec.rho_grid = parse_rho_grid(s["rho_grid"]);
    spec.repetitions = int(number_or(s, "repetitions", 1));
    if (spec.repetitions < 1) fail("sweep.repetitions must be >= 1");
    spec.seed = uint64_t(number_or(s, "seed", 1));
    spec.strategies = s.contains("strategies")
                          ? parse_strategies(s["strategies"])
                          : std::vector<StrategyKind>{StrategyKind::IP,
                                                      StrategyKind::CP,
                                                      StrategyKind::HP};
    if (s.contains("rho_noise_sd")) spec.rho_noise_sd = s["rho_noise_sd"].get<double>();
    sc.sweep = spec;
  }

  if (j.contains("misreport")) {
    const auto& s = j["misreport"];
    expect_keys(s, "misreport", {"deviator", "reported_rho", "repetitions", "seed"});
    MisreportSpec spec;
    spec.deviator = int(number_or(s, "deviator", 0));
    spec.reported_rho = number(s, "misreport", "reported_rho");
    spec.repetitions = int(number_or(s, "repetitions", 1));
    spec.seed = uint64_t(number_or(s, "seed", 1));
    sc.misreport = spec;
  }

  if (j.contains("counterexample")) {
    const auto& s = j["counterexample"];
    expect_keys(s, "counterexample",
                {"p", "eta", "repetitions", "seed", "horizon", "curve_stride"});
    CounterexampleSpec spec;
    spec.p = number(s, "counterexample", "p");
    spec.eta = number(s, "counterexample", "eta");
    spec.repetitions = int(number_or(s, "repetitions", 100));
    spec.seed = uint64_t(number_or(s, "seed", 1));
    spec.horizon = int(number_or(s, "horizon", 20000));
    spec.curve_stride = int(number_or(s, "curve_stride", 100));
    if (!(spec.p > 0.0 && spec.p < 1.0 && spec.eta > 0.0 && spec.eta < 1.0))
      fail("counterexample needs p, eta in (0, 1)");
    sc.counterexample = spec;
  }

  if (j.contains("equilibrium")) {
    const auto& s = j["equilibrium"];
    expect_keys(s, "equilibrium",
                {"families", "tolerance", "max_iter", "method", "gamma_hint"});
    EquilibriumSpec spec;
    if (s.contains("families"))
      for (const auto& f : s["families"])
        spec.families.push_back(family_from_string(f.get<std::string>()));
    else
      spec.families = {Family::IP, Family::CP, Family::HP};
    spec.tolerance = number_or(s, "tolerance", 1e-3);
    spec.max_iter = int(number_or(s, "max_iter", 20000));
    if (s.contains("method")) spec.method = parse_method(s["method"], "equilibrium.method");
    if (s.contains("gamma_hint")) spec.gamma_hint = s["gamma_hint"].get<double>();
    sc.equilibrium = spec;
  }

  if (j.contains("monotonicity")) {
    const auto& s = j["monotonicity"];
    expect_keys(s, "monotonicity",
                {"family", "grid_width", "box_lo", "box_hi", "pairs",
                 "sampled_pairs", "method"});
    MonotonicitySpec spec;
    spec.family = family_from_string(s.value("family", "IP"));
    spec.grid_width = number_or(s, "grid_width", 0.003);
    const auto lo = s.at("box_lo").get<std::vector<double>>();
    const auto hi = s.at("box_hi").get<std::vector<double>>();
    spec.box_lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size());
    spec.box_hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size());
    const std::string pairs = s.value("pairs", "axis-adjacent");
    if (pairs == "axis-adjacent")
      spec.policy = PairPolicy::AxisAdjacent;
    else if (pairs == "all")
      spec.policy = PairPolicy::AllPairs;
    else if (pairs == "sampled")
      spec.policy = PairPolicy::Sampled;
    else
      fail("monotonicity.pairs must be axis-adjacent, all, or sampled");
    spec.sampled_pairs = int(number_or(s, "sampled_pairs", 100000));
    if (s.contains("method")) spec.method = parse_method(s["method"], "monotonicity.method");
    sc.monotonicity = spec;
  }

  if (j.contains("hindsight")) {
    const auto& s = j["hindsight"];
    expect_keys(s, "hindsight", {"rounds", "seed", "dual_samples", "dual_iterations"});
    HindsightSpec spec;
    spec.rounds = int(number_or(s, "rounds", 10));
    spec.seed = uint64_t(number_or(s, "seed", 1));
    spec.dual_samples = int(number_or(s, "dual_samples", 100000));
    spec.dual_iterations = int(number_or(s, "dual_iterations", 4000));
    sc.hindsight = spec;
  }

  if (j.contains("ingest")) {
    const auto& s = j["ingest"];
    expect_keys(s, "ingest", {"csv", "k", "seed"});
    IngestSpec spec;
    if (!s.contains("csv")) fail("ingest needs 'csv'");
    spec.csv_path = s["csv"].get<std::string>();
    spec.coalition_size = int(number(s, "ingest", "k"));
    spec.seed = uint64_t(number_or(s, "seed", 1));
    sc.ingest = spec;
  }

  return sc;
}
}  // namespace

}  // namespace copa
