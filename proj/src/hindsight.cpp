#include "copa/hindsight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "copa/stats.hpp"

namespace copa {

HindsightInstance draw_instance(const MarketConfig& market, int rounds,
                                uint64_t seed, StreamId id) {
  const int k_count = market.size();
  HindsightInstance out;
  out.values.resize(rounds, k_count);
  out.outside.resize(rounds);
  out.rhos = market.rhos();
  RngStream base(seed, id);
  for (int t = 0; t < rounds; ++t) {
    for (int k = 0; k < k_count; ++k) {
      RngStream s =
          base.at({id.experiment, id.repetition, uint32_t(k), uint32_t(t + 1)});
      out.values(t, k) = market.bidders[k].value_dist.sample(s);
    }
    RngStream s =
        base.at({id.experiment, id.repetition, uint32_t(k_count), uint32_t(t + 1)});
    out.outside[t] = market.outside.sample(s);
  }
  return out;
}

double dual_bound(const HindsightInstance& instance, const Eigen::VectorXd& mu) {
  if ((mu.array() < 0.0).any())
    throw std::invalid_argument("dual_bound: mu must be nonnegative");
  const int rounds = instance.rounds();
  const int k_count = instance.bidder_count();
  double relaxed = 0.0;
  for (int t = 0; t < rounds; ++t) {
    double best = 0.0;
    for (int k = 0; k < k_count; ++k)
      best = std::max(best,
                      instance.values(t, k) - (1.0 + mu[k]) * instance.outside[t]);
    relaxed += best;
  }
  return relaxed / double(rounds) + instance.rhos.dot(mu);
}

namespace {

struct Search {
  const HindsightInstance& inst;
  std::vector<Eigen::VectorXd> mu_grid;
  // suffix[g][t]: sum over rounds >= t of max_k (v - (1+mu)d)^+ for grid mu g
  std::vector<std::vector<double>> suffix;
  std::vector<int> pick;
  std::vector<int> best_pick;
  double best = -1.0;

  double bound_from(int t, const Eigen::VectorXd& capacity) const {
    double b = std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < mu_grid.size(); ++g)
      b = std::min(b, suffix[g][t] + mu_grid[g].dot(capacity));
    return b;
  }

  void dfs(int t, double value, Eigen::VectorXd& capacity) {
    if (t == inst.rounds()) {
      if (value > best) {
        best = value;
        best_pick = pick;
      }
      return;
    }
    if (value + bound_from(t, capacity) <= best - 1e-12) return;

    // Children ordered by immediate utility, skip first keeps ties stable.
    const double price = inst.outside[t];
    std::vector<std::pair<double, int>> order;
    order.reserve(inst.bidder_count() + 1);
    order.emplace_back(0.0, -1);
    for (int k = 0; k < inst.bidder_count(); ++k) {
      if (price <= capacity[k])
        order.emplace_back(inst.values(t, k) - price, k);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [gain, k] : order) {
      pick[t] = k;
      if (k >= 0) {
        capacity[k] -= price;
        dfs(t + 1, value + gain, capacity);
        capacity[k] += price;
      } else {
        dfs(t + 1, value, capacity);
      }
    }
    pick[t] = -1;
  }
};

}  // namespace

HindsightSolution hindsight_exact(const HindsightInstance& instance) {
  const int rounds = instance.rounds();
  const int k_count = instance.bidder_count();
  if (k_count > 3 || rounds > 20)
    throw std::invalid_argument(
        "hindsight_exact limited to K <= 3, T <= 20; use the dual bound");

  Search search{instance, {}, {}, std::vector<int>(rounds, -1), {}, -1.0};

  // Small Lagrangian grid for the suffix bounds.
  const std::vector<double> levels = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<Eigen::VectorXd> grid;
  std::vector<int> idx(k_count, 0);
  for (;;) {
    Eigen::VectorXd mu(k_count);
    for (int k = 0; k < k_count; ++k) mu[k] = levels[idx[k]];
    grid.push_back(mu);
    int j = 0;
    while (j < k_count && ++idx[j] == int(levels.size())) idx[j++] = 0;
    if (j == k_count) break;
  }
  search.mu_grid = grid;
  search.suffix.assign(grid.size(), std::vector<double>(rounds + 1, 0.0));
  for (size_t g = 0; g < grid.size(); ++g) {
    for (int t = rounds - 1; t >= 0; --t) {
      double bestk = 0.0;
      for (int k = 0; k < k_count; ++k)
        bestk = std::max(bestk, instance.values(t, k) -
                                    (1.0 + grid[g][k]) * instance.outside[t]);
      search.suffix[g][t] = search.suffix[g][t + 1] + bestk;
    }
  }

  Eigen::VectorXd capacity = instance.rhos * double(rounds);
  search.dfs(0, 0.0, capacity);

  HindsightSolution out;
  out.welfare = std::max(search.best, 0.0);
  out.winner = search.best_pick.empty() ? std::vector<int>(rounds, -1)
                                        : search.best_pick;

  // Independent feasibility recheck of the reported allocation.
  Eigen::VectorXd spent = Eigen::VectorXd::Zero(k_count);
  for (int t = 0; t < rounds; ++t)
    if (out.winner[t] >= 0) spent[out.winner[t]] += instance.outside[t];
  for (int k = 0; k < k_count; ++k)
    if (spent[k] > instance.rhos[k] * double(rounds) + 1e-9)
      throw std::logic_error("hindsight_exact produced an infeasible allocation");
  return out;
}

Estimate dual_bound(const MarketConfig& market, const Eigen::VectorXd& mu,
                    const SampleCache& cache) {
  if ((mu.array() < 0.0).any())
    throw std::invalid_argument("dual_bound: mu must be nonnegative");
  const int n = cache.count();
  const int k_count = market.size();
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int k = 0; k < k_count; ++k)
      best = std::max(best,
                      cache.values()(i, k) - (1.0 + mu[k]) * cache.outside()[i]);
    xs[i] = best;
  }
  const MeanSe ms = mean_and_se(xs);
  return {ms.mean + market.rhos().dot(mu), ms.se};
}

namespace {

// Selection-aware expected expenditure G^S_k(mu): the spend of the bidder
// with the best relaxed surplus, when that surplus is nonnegative.
Eigen::VectorXd selection_expenditure(const MarketConfig& market,
                                      const Eigen::VectorXd& mu,
                                      const SampleCache& cache) {
  const int n = cache.count();
  const int k_count = market.size();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(k_count);
  for (int i = 0; i < n; ++i) {
    int best_k = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_count; ++k) {
      const double surplus =
          cache.values()(i, k) - (1.0 + mu[k]) * cache.outside()[i];
      if (surplus > best) {
        best = surplus;
        best_k = k;
      }
    }
    if (best >= 0.0) total[best_k] += cache.outside()[i];
  }
  return total / double(n);
}

}  // namespace

DualSolution minimize_dual(const MarketConfig& market, const SampleCache& cache,
                           int iterations, double eta0) {
  const int k_count = market.size();
  const Eigen::VectorXd rho = market.rhos();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(k_count);
  DualSolution best;
  best.mu = mu;
  best.value = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= iterations; ++iter) {
    const double value = dual_bound(market, mu, cache).value;
    if (value < best.value) {
      best.value = value;
      best.mu = mu;
      best.iterations = iter;
    }
    const Eigen::VectorXd gs = selection_expenditure(market, mu, cache);
    const double eta = eta0 / std::sqrt(double(iter));
    mu = (mu - eta * (rho - gs)).cwiseMax(0.0);
  }
  best.selection_residual = rho - selection_expenditure(market, best.mu, cache);
  return best;
}

}  // namespace copa
