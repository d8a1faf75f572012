#include "copa/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "copa/quadrature.hpp"
#include "copa/stats.hpp"

namespace copa {

std::string to_string(Family family) {
  switch (family) {
    case Family::IP: return "IP";
    case Family::CP: return "CP";
    case Family::HP: return "HP";
  }
  return "?";
}

SampleCache::SampleCache(const MarketConfig& market, int n, uint64_t seed, StreamId id) {
  const int k_count = market.size();
  values_.resize(n, k_count);
  outside_.resize(n);
  RngStream base(seed, id);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < k_count; ++k) {
      RngStream s =
          base.at({id.experiment, id.repetition, uint32_t(k), uint32_t(i + 1)});
      values_(i, k) = market.bidders[k].value_dist.sample(s);
    }
    RngStream s =
        base.at({id.experiment, id.repetition, uint32_t(k_count), uint32_t(i + 1)});
    outside_(i) = market.outside.sample(s);
  }
}

namespace {

void check_query(const ExpectationQuery& q, int k_count) {
  if (q.bidder < 0 || q.bidder >= k_count)
    throw std::invalid_argument("estimator: bidder index out of range");
  if (q.multipliers.size() != k_count)
    throw std::invalid_argument("estimator: multiplier vector size mismatch");
  for (int i = 0; i < k_count; ++i)
    if (!(q.multipliers[i] >= 0.0))
      throw std::invalid_argument("estimator: multipliers must be nonnegative");
  if (q.family == Family::HP) {
    if (!(q.hp_external >= 0.0) || !(q.hp_external <= q.multipliers[q.bidder] + 1e-15))
      throw std::invalid_argument("estimator: HP needs 0 <= mu_k <= lambda_k");
  }
}

}  // namespace

WinPrice win_and_price(const ExpectationQuery& q, const Eigen::VectorXd& values,
                       double outside) {
  const int k = q.bidder;
  const int k_count = int(values.size());
  switch (q.family) {
    case Family::IP: {
      double rival = 0.0;
      for (int i = 0; i < k_count; ++i) {
        if (i == k) continue;
        rival = std::max(rival, values[i] / (1.0 + q.multipliers[i]));
      }
      const double competing = std::max(rival, outside);
      const double own = values[k] / (1.0 + q.multipliers[k]);
      return {own >= competing, competing};
    }
    case Family::CP: {
      double rival = 0.0;
      for (int i = 0; i < k_count; ++i) {
        if (i == k) continue;
        rival = std::max(rival, values[i] / (1.0 + q.multipliers[i]));
      }
      const double own = values[k] / (1.0 + q.multipliers[k]);
      return {own >= std::max(rival, outside), outside};
    }
    case Family::HP: {
      double rival = 0.0;
      for (int i = 0; i < k_count; ++i) {
        if (i == k) continue;
        rival = std::max(rival, values[i] / (1.0 + q.multipliers[i]));
      }
      const double internal = values[k] / (1.0 + q.multipliers[k]);
      const double external = values[k] / (1.0 + q.hp_external);
      return {internal >= rival && external >= outside, outside};
    }
  }
  return {};
}

Estimate estimate_mc(const ExpectationQuery& q, const SampleCache& cache) {
  check_query(q, int(cache.values().cols()));
  const int n = cache.count();
  std::vector<double> g(n), v(n), u(n);
  for (int i = 0; i < n; ++i) {
    const WinPrice wp = win_and_price(q, cache.values().row(i), cache.outside()[i]);
    if (wp.win) {
      const double value = cache.values()(i, q.bidder);
      g[i] = wp.price;
      v[i] = value;
      u[i] = value - wp.price;
    } else {
      g[i] = v[i] = u[i] = 0.0;
    }
  }
  switch (q.quantity) {
    case Quantity::Expenditure:
      return {mean_and_se(g).mean, mean_and_se(g).se};
    case Quantity::Value:
      return {mean_and_se(v).mean, mean_and_se(v).se};
    case Quantity::Utility: {
      // Point estimate defined as V - G from the same matched pass so the
      // decomposition identity holds bitwise; the spread comes from the
      // per-sample utilities.
      const double value = mean_and_se(v).mean - mean_and_se(g).mean;
      return {value, mean_and_se(u).se};
    }
  }
  return {};
}

std::vector<Estimate> estimate_batch(std::span<const ExpectationQuery> queries,
                                     const SampleCache& cache) {
  std::vector<Estimate> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(estimate_mc(q, cache));
  return out;
}

namespace {

// Distribution of the strongest shaded rival bid d^I_k: the product CDF
// L_k(x) = prod_{i != k} F_i((1 + m_i) x) and its density l_k.
struct RivalLaw {
  const MarketConfig& market;
  const Eigen::VectorXd& mult;
  int k;

  double cdf(double x) const {
    double acc = 1.0;
    for (int i = 0; i < market.size(); ++i) {
      if (i == k) continue;
      acc *= market.bidders[i].value_dist.cdf((1.0 + mult[i]) * x);
    }
    return acc;
  }
  double pdf(double x) const {
    double acc = 0.0;
    for (int i = 0; i < market.size(); ++i) {
      if (i == k) continue;
      double term =
          (1.0 + mult[i]) * market.bidders[i].value_dist.pdf((1.0 + mult[i]) * x);
      for (int j = 0; j < market.size(); ++j) {
        if (j == k || j == i) continue;
        term *= market.bidders[j].value_dist.cdf((1.0 + mult[j]) * x);
      }
      acc += term;
    }
    return acc;
  }
  double hi() const {
    double m = 0.0;
    for (int i = 0; i < market.size(); ++i) {
      if (i == k) continue;
      m = std::max(m, market.bidders[i].value_dist.support_hi() / (1.0 + mult[i]));
    }
    return m;
  }
};

double quad_g_ip(const ExpectationQuery& q, const MarketConfig& market, double tol) {
  const int k = q.bidder;
  const auto& fk = market.bidders[k].value_dist;
  const double shade = 1.0 + q.multipliers[k];
  const RivalLaw rival{market, q.multipliers, k};
  const auto& outside = market.outside;
  auto survival = [&](double x) { return 1.0 - fk.cdf(shade * x); };

  const double own_cap = fk.support_hi() / shade;
  if (outside.is_point_mass()) {
    const double c = outside.atom();
    double total = c >= 0.0 && c <= own_cap ? rival.cdf(c) * c * survival(c) : 0.0;
    const double hi = std::min(own_cap, rival.hi());
    if (hi > c)
      total += integrate(
          [&](double x) { return x * survival(x) * rival.pdf(x); }, c, hi, tol);
    return total;
  }
  const double hi = std::min(own_cap, std::max(rival.hi(), outside.support_hi()));
  return integrate(
      [&](double x) {
        return x * survival(x) *
               (rival.pdf(x) * outside.cdf(x) + rival.cdf(x) * outside.pdf(x));
      },
      0.0, hi, tol);
}

double quad_v_shared(const ExpectationQuery& q, const MarketConfig& market, double tol,
                     double internal_shade, double external_shade) {
  // E[ 1{win} v_k ] with win = {d^I <= v/internal_shade and d^O <= v/external_shade}
  const int k = q.bidder;
  const auto& fk = market.bidders[k].value_dist;
  const RivalLaw rival{market, q.multipliers, k};
  return integrate(
      [&](double v) {
        return v * rival.cdf(v / internal_shade) *
               market.outside.cdf(v / external_shade) * fk.pdf(v);
      },
      fk.support_lo(), fk.support_hi(), tol);
}

double quad_g_cp(const ExpectationQuery& q, const MarketConfig& market, double tol) {
  const int k = q.bidder;
  const auto& fk = market.bidders[k].value_dist;
  const double shade = 1.0 + q.multipliers[k];
  const RivalLaw rival{market, q.multipliers, k};
  const auto& outside = market.outside;
  auto survival = [&](double x) { return 1.0 - fk.cdf(shade * x); };
  const double own_cap = fk.support_hi() / shade;
  const double rival_hi = std::min(own_cap, rival.hi());

  // Probability the coalition's elected member k clears price level y.
  auto clears = [&](double y) {
    if (y > own_cap) return 0.0;
    double acc = survival(y) * rival.cdf(y);
    if (rival_hi > y)
      acc += integrate([&](double x) { return survival(x) * rival.pdf(x); }, y,
                       rival_hi, tol * 0.1);
    return acc;
  };

  if (outside.is_point_mass()) {
    const double c = outside.atom();
    return c * clears(c);
  }
  const double hi = std::min(own_cap, outside.support_hi());
  const double lo = std::max(0.0, outside.support_lo());
  if (hi <= lo) return 0.0;
  return integrate([&](double y) { return y * clears(y) * outside.pdf(y); }, lo, hi,
                   tol);
}

double quad_g_hp(const ExpectationQuery& q, const MarketConfig& market, double tol) {
  const int k = q.bidder;
  const auto& fk = market.bidders[k].value_dist;
  const double internal_shade = 1.0 + q.multipliers[k];
  const double external_shade = 1.0 + q.hp_external;
  const RivalLaw rival{market, q.multipliers, k};
  const auto& outside = market.outside;

  // P(internal election win and value clears (1+mu) y)
  auto wins_at = [&](double y) {
    const double v_lo = std::max(external_shade * y, fk.support_lo());
    if (v_lo >= fk.support_hi()) return 0.0;
    return integrate(
        [&](double v) { return rival.cdf(v / internal_shade) * fk.pdf(v); }, v_lo,
        fk.support_hi(), tol * 0.1);
  };

  if (outside.is_point_mass()) {
    const double c = outside.atom();
    return c * wins_at(c);
  }
  const double hi = std::min(fk.support_hi() / external_shade, outside.support_hi());
  const double lo = std::max(0.0, outside.support_lo());
  if (hi <= lo) return 0.0;
  return integrate([&](double y) { return y * wins_at(y) * outside.pdf(y); }, lo, hi,
                   tol);
}

}  // namespace

Estimate estimate_quadrature(const ExpectationQuery& q, const MarketConfig& market,
                             double tol) {
  check_query(q, market.size());
  if (market.size() + 1 > 3)
    throw std::invalid_argument(
        "quadrature rejected beyond three dimensions; use Monte Carlo");
  for (const auto& b : market.bidders)
    if (!b.value_dist.has_density())
      throw std::invalid_argument("quadrature needs value laws with densities");
  if (!market.outside.has_density() && !market.outside.is_point_mass())
    throw std::invalid_argument(
        "quadrature needs an outside law with a density or a point mass");

  auto g = [&]() {
    switch (q.family) {
      case Family::IP: return quad_g_ip(q, market, tol);
      case Family::CP: return quad_g_cp(q, market, tol);
      case Family::HP: return quad_g_hp(q, market, tol);
    }
    return 0.0;
  };
  auto v = [&]() {
    const double internal_shade = 1.0 + q.multipliers[q.bidder];
    const double external_shade =
        q.family == Family::HP ? 1.0 + q.hp_external : internal_shade;
    return quad_v_shared(q, market, tol, internal_shade, external_shade);
  };

  switch (q.quantity) {
    case Quantity::Expenditure: return {g(), tol};
    case Quantity::Value: return {v(), tol};
    case Quantity::Utility: return {v() - g(), 2.0 * tol};
  }
  return {};
}

}  // namespace copa
