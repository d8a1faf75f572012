#include "copa/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "copa/rng.hpp"

namespace copa {

namespace {

Eigen::VectorXd eval_g(Family family, const MarketConfig& market,
                       const EstimationMethod& method, const SampleCache* cache,
                       const Eigen::VectorXd& mult) {
  Eigen::VectorXd g(market.size());
  for (int k = 0; k < market.size(); ++k) {
    ExpectationQuery q;
    q.family = family;
    q.quantity = Quantity::Expenditure;
    q.bidder = k;
    q.multipliers = mult;
    if (family == Family::HP) q.hp_external = mult[k];
    g[k] = method.kind == EstimationMethod::Kind::MonteCarlo
               ? estimate_mc(q, *cache).value
               : estimate_quadrature(q, market, method.tol).value;
  }
  return g;
}

}  // namespace

ExpenditureMap make_expenditure_map(Family family, const MarketConfig& market,
                                    const EstimationMethod& method) {
  ExpenditureMap map;
  map.rhos = market.effective_rhos();
  map.caps = market.caps();
  std::shared_ptr<SampleCache> cache;
  if (method.kind == EstimationMethod::Kind::MonteCarlo)
    cache = std::make_shared<SampleCache>(market, method.samples, method.seed);
  map.G = [family, market, method, cache](const Eigen::VectorXd& mult) {
    return eval_g(family, market, method, cache.get(), mult);
  };
  return map;
}

EquilibriumResult solve_ncp(const ExpenditureMap& map, double tolerance,
                            int max_iter, double eta0) {
  const int n = map.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  EquilibriumResult best;
  best.multipliers = x;
  double best_score = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter; ++iter) {
    const Eigen::VectorXd g = map.G(x);
    const Eigen::VectorXd residual = (x.array() * (map.rhos - g).array()).abs();
    const Eigen::VectorXd slack = (g - map.rhos).cwiseMax(0.0);
    const double score = std::max(residual.maxCoeff(), slack.maxCoeff());
    if (score < best_score) {
      best_score = score;
      best.multipliers = x;
      best.residual = residual;
      best.slack = slack;
      best.iterations = iter;
    }
    if (score < tolerance) {
      best.converged = true;
      return best;
    }
    const double eta = eta0 / std::sqrt(double(iter));
    x = (x - eta * (map.rhos - g)).cwiseMax(0.0).cwiseMin(map.caps);
  }
  best.converged = false;
  return best;
}

EquilibriumResult solve_ncp(Family family, const MarketConfig& market,
                            const EstimationMethod& method, double tolerance,
                            int max_iter, std::optional<double> gamma_hint) {
  const ExpenditureMap map = make_expenditure_map(family, market, method);
  const double eta0 = gamma_hint ? 0.5 / *gamma_hint : 0.1;
  return solve_ncp(map, tolerance, max_iter, eta0);
}

EquilibriumResult solve_hp_equilibrium(const MarketConfig& market,
                                       const Eigen::VectorXd& lambda_star,
                                       const EstimationMethod& method,
                                       double tolerance) {
  const int k_count = market.size();
  const Eigen::VectorXd rho = market.effective_rhos();
  std::shared_ptr<SampleCache> cache;
  if (method.kind == EstimationMethod::Kind::MonteCarlo)
    cache = std::make_shared<SampleCache>(market, method.samples, method.seed);

  auto g_hp = [&](int k, double mu) {
    ExpectationQuery q;
    q.family = Family::HP;
    q.quantity = Quantity::Expenditure;
    q.bidder = k;
    q.multipliers = lambda_star;
    q.hp_external = mu;
    return method.kind == EstimationMethod::Kind::MonteCarlo
               ? estimate_mc(q, *cache).value
               : estimate_quadrature(q, market, method.tol).value;
  };

  EquilibriumResult out;
  out.multipliers = lambda_star;
  out.external = Eigen::VectorXd::Zero(k_count);
  out.residual = Eigen::VectorXd::Zero(k_count);
  out.slack = Eigen::VectorXd::Zero(k_count);
  out.hp_derivative = Eigen::VectorXd::Zero(k_count);
  out.converged = true;

  for (int k = 0; k < k_count; ++k) {
    const double hi_mu = lambda_star[k];
    const double g0 = g_hp(k, 0.0);
    double mu = 0.0;
    if (g0 <= rho[k]) {
      mu = 0.0;  // slack at zero: complementarity satisfied
    } else {
      const double g_hi = g_hp(k, hi_mu);
      if (g_hi > rho[k]) {
        // Non-bracketing: G^HP at the pseudo multiplier still exceeds the
        // target. Either estimator noise or a failed assumption; flag it.
        mu = hi_mu;
        out.slack[k] = g_hi - rho[k];
        out.converged = false;
      } else {
        double lo = 0.0, hi = hi_mu;
        for (int step = 0; step < 200 && hi - lo > 1e-13; ++step) {
          const double mid = 0.5 * (lo + hi);
          if (g_hp(k, mid) > rho[k])
            lo = mid;
          else
            hi = mid;
        }
        mu = 0.5 * (lo + hi);
        out.residual[k] = std::abs(mu * (rho[k] - g_hp(k, mu)));
        if (out.residual[k] > tolerance) out.converged = false;
      }
    }
    out.external[k] = mu;
    const double h = std::max(1e-4, 1e-3 * std::max(1.0, hi_mu));
    const double up = std::min(mu + h, hi_mu);
    const double dn = std::max(mu - h, 0.0);
    if (up > dn) out.hp_derivative[k] = (g_hp(k, up) - g_hp(k, dn)) / (up - dn);
    ++out.iterations;
  }
  return out;
}

MonotonicityReport check_monotonicity(const ExpenditureMap& map,
                                      const Eigen::VectorXd& box_lo,
                                      const Eigen::VectorXd& box_hi,
                                      double grid_width, PairPolicy policy,
                                      int sampled_pairs, uint64_t seed) {
  const int dim = map.size();
  if (box_lo.size() != dim || box_hi.size() != dim)
    throw std::invalid_argument("monotonicity: box dimension mismatch");
  if (!(grid_width > 0.0)) throw std::invalid_argument("monotonicity: grid width <= 0");

  std::vector<int> steps(dim);
  long grid_points = 1;
  for (int j = 0; j < dim; ++j) {
    if (!(box_hi[j] >= box_lo[j]))
      throw std::invalid_argument("monotonicity: empty box");
    steps[j] = int(std::floor((box_hi[j] - box_lo[j]) / grid_width + 1e-9)) + 1;
    grid_points *= steps[j];
  }

  auto point_at = [&](long index) {
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) {
      x[j] = box_lo[j] + double(index % steps[j]) * grid_width;
      index /= steps[j];
    }
    return x;
  };

  MonotonicityReport report;
  report.grid_width = grid_width;
  report.gamma_hat = std::numeric_limits<double>::infinity();

  auto consider = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& ga,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& gb) {
    const Eigen::VectorXd d = a - b;
    const double nn = d.squaredNorm();
    if (nn == 0.0) return;
    const double ratio = d.dot(gb - ga) / nn;
    if (ratio < report.gamma_hat) {
      report.gamma_hat = ratio;
      report.argmin = {a, b};
    }
  };

  if (policy == PairPolicy::Sampled) {
    RngStream rng(seed, {});
    for (int s = 0; s < sampled_pairs; ++s) {
      const long ia = long(rng.next_unit() * double(grid_points));
      const long ib = long(rng.next_unit() * double(grid_points));
      if (ia == ib) continue;
      const Eigen::VectorXd a = point_at(std::min(ia, grid_points - 1));
      const Eigen::VectorXd b = point_at(std::min(ib, grid_points - 1));
      consider(a, map.G(a), b, map.G(b));
    }
    return report;
  }

  std::vector<Eigen::VectorXd> pts(grid_points), gs(grid_points);
  for (long i = 0; i < grid_points; ++i) {
    pts[i] = point_at(i);
    gs[i] = map.G(pts[i]);
  }

  if (policy == PairPolicy::AllPairs) {
    for (long a = 0; a < grid_points; ++a)
      for (long b = a + 1; b < grid_points; ++b)
        consider(pts[a], gs[a], pts[b], gs[b]);
  } else {
    long stride = 1;
    for (int j = 0; j < dim; ++j) {
      for (long i = 0; i < grid_points; ++i) {
        const long coord = (i / stride) % steps[j];
        if (coord + 1 < steps[j])
          consider(pts[i], gs[i], pts[i + stride], gs[i + stride]);
      }
      stride *= steps[j];
    }
  }
  return report;
}

std::vector<Estimate> equilibrium_utilities(Family family,
                                            const EquilibriumResult& result,
                                            const MarketConfig& market,
                                            const EstimationMethod& method) {
  std::shared_ptr<SampleCache> cache;
  if (method.kind == EstimationMethod::Kind::MonteCarlo)
    cache = std::make_shared<SampleCache>(market, method.samples, method.seed);
  std::vector<Estimate> out;
  for (int k = 0; k < market.size(); ++k) {
    ExpectationQuery q;
    q.family = family;
    q.quantity = Quantity::Utility;
    q.bidder = k;
    q.multipliers = result.multipliers;
    if (family == Family::HP) q.hp_external = result.external[k];
    out.push_back(method.kind == EstimationMethod::Kind::MonteCarlo
                      ? estimate_mc(q, *cache)
                      : estimate_quadrature(q, market, method.tol));
  }
  return out;
}

}  // namespace copa
