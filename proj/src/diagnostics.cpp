#include "copa/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "copa/csv.hpp"
#include "copa/stats.hpp"

namespace copa {

void write_trace_csv(const std::string& path, std::span<const RoundRecord> trace,
                     StrategyKind kind) {
  CsvTable table;
  table.header = {"round",       "bidder",      "value",
                  "internal_bid", "external_bid", "competing",
                  "won",         "expenditure", "pseudo_expenditure",
                  "utility",     "lambda",      "mu_or_xi"};
  table.header.push_back("remaining_budget");
  for (const auto& rec : trace) {
    const int k_count = int(rec.draw.values.size());
    for (int k = 0; k < k_count; ++k) {
      std::vector<std::string> row;
      row.push_back(std::to_string(rec.draw.round));
      row.push_back(std::to_string(k));
      row.push_back(format_double(rec.draw.values[k]));
      row.push_back(rec.outcome.internal_bids.size()
                        ? format_double(rec.outcome.internal_bids[k])
                        : std::string{});
      row.push_back(format_double(rec.outcome.bids[k]));
      row.push_back(format_double(rec.outcome.competing[k]));
      row.push_back(rec.outcome.allocation[k] ? "1" : "0");
      row.push_back(format_double(rec.outcome.expenditure[k]));
      row.push_back(rec.outcome.pseudo_expenditure.size()
                        ? format_double(rec.outcome.pseudo_expenditure[k])
                        : std::string{});
      row.push_back(format_double(rec.outcome.utility[k]));
      switch (kind) {
        case StrategyKind::IP:
          row.push_back(format_double(rec.multiplier[k]));
          row.push_back("");
          break;
        case StrategyKind::CP:
          row.push_back("");
          row.push_back(format_double(rec.multiplier[k]));
          break;
        case StrategyKind::HP:
          row.push_back(format_double(rec.multiplier[k]));
          row.push_back(format_double(rec.external[k]));
          break;
      }
      row.push_back(format_double(rec.remaining[k]));
      table.rows.push_back(std::move(row));
    }
  }
  write_csv(path, table);
}

ConvergenceDiagnostics convergence_diagnostics(std::span<const RoundRecord> trace,
                                               const Eigen::VectorXd& rhos,
                                               int window) {
  const int rounds = int(trace.size());
  if (rounds < window)
    throw std::invalid_argument("convergence_diagnostics: trace shorter than window");
  const int k_count = int(rhos.size());
  const bool has_external = trace.front().external.size() > 0;

  ConvergenceDiagnostics out;
  out.running_average_variance.emplace_back(Eigen::VectorXd::Zero(k_count));
  if (has_external)
    out.running_average_variance.emplace_back(Eigen::VectorXd::Zero(k_count));
  out.complementarity_residual.resize(k_count);

  for (int k = 0; k < k_count; ++k) {
    double sum_primary = 0.0, sum_external = 0.0, sum_z = 0.0;
    RunningStat primary_window, external_window;
    for (int t = 0; t < rounds; ++t) {
      sum_primary += trace[t].multiplier[k];
      if (has_external) sum_external += trace[t].external[k];
      sum_z += trace[t].outcome.expenditure[k];
      if (t >= rounds - window) {
        primary_window.add(sum_primary / double(t + 1));
        if (has_external) external_window.add(sum_external / double(t + 1));
      }
    }
    out.running_average_variance[0][k] = primary_window.population_variance();
    if (has_external)
      out.running_average_variance[1][k] = external_window.population_variance();
    const double avg_mult =
        (has_external ? sum_external : sum_primary) / double(rounds);
    const double avg_z = sum_z / double(rounds);
    out.complementarity_residual[k] = std::abs(avg_mult * (rhos[k] - avg_z));
  }
  return out;
}

}  // namespace copa
