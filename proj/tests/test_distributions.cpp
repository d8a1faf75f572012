#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "copa/distributions.hpp"
#include "copa/quadrature.hpp"
#include "copa/rng.hpp"
#include "copa/stats.hpp"

using namespace copa;

namespace {

Distribution c4_value_law() {
  return Distribution::affine_combination(
      {1.0 / 3.0, 2.0 / 3.0},
      {Distribution::uniform(0.0, 1.0), Distribution::uniform(1.0, 2.0)});
}

std::vector<Distribution> density_kinds() {
  return {
      Distribution::uniform(0.0, 1.0),
      Distribution::truncated_gaussian(0.5, 0.2, 0.0, 1.0),
      Distribution::piecewise_uniform({{0.0, 1.0, 0.5}, {4.0, 5.0, 0.5}}),
      Distribution::exponential_truncated(2.0, 1.0),
      Distribution::power_law_truncated(2.5, 0.1, 1.0),
      Distribution::mixture({0.1, 0.9},
                            {Distribution::uniform(0.0, 1.0),
                             Distribution::uniform(1.0, 1.1)}),
      c4_value_law(),
  };
}

double ks_statistic(std::vector<double> draws, const Distribution& law) {
  std::sort(draws.begin(), draws.end());
  const double n = double(draws.size());
  double ks = 0.0;
  for (size_t i = 0; i < draws.size(); ++i) {
    const double f = law.cdf(draws[i]);
    ks = std::max(ks, std::max(f - double(i) / n, double(i + 1) / n - f));
  }
  return ks;
}

}  // namespace

TEST_CASE("samples stay inside the support") {
  RngStream rng(42, {});
  auto u = Distribution::uniform(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.sample(rng);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  auto pw = Distribution::piecewise_uniform({{0.0, 1.0, 0.5}, {4.0, 5.0, 0.5}});
  for (int i = 0; i < 1000; ++i) {
    const double x = pw.sample(rng);
    const bool inside = (x >= 0.0 && x <= 1.0) || (x >= 4.0 && x <= 5.0);
    CHECK(inside);
  }
}

TEST_CASE("truncated gaussian symmetric about its mean") {
  auto tg = Distribution::truncated_gaussian(0.5, 0.2, 0.0, 1.0);
  RngStream rng(7, {});
  const int n = 1000000;
  RunningStat stat;
  for (int i = 0; i < n; ++i) stat.add(tg.sample(rng));
  // Symmetric truncation keeps the mean; allow a 3-sigma CLT band.
  CHECK(std::abs(stat.mean() - 0.5) < 3.0 * stat.stddev() / 1000.0);
}

TEST_CASE("cdf fixed points") {
  CHECK(Distribution::uniform(0.0, 1.0).cdf(0.25) == doctest::Approx(0.25));
  auto pw = Distribution::piecewise_uniform({{0.0, 1.0, 0.5}, {4.0, 5.0, 0.5}});
  CHECK(pw.cdf(2.0) == doctest::Approx(0.5));  // all the mass left of the gap
  auto tg = Distribution::truncated_gaussian(0.5, 0.2, 0.0, 1.0);
  CHECK(tg.cdf(0.5) == doctest::Approx(0.5));
}

TEST_CASE("pdf fixed points") {
  CHECK(Distribution::uniform(0.0, 1.0).pdf(0.5) == doctest::Approx(1.0));
  CHECK(Distribution::uniform(0.0, 1.0).pdf(1.5) == 0.0);

  // Truncation renormalizes: oracle integrates the unnormalized density.
  auto expt = Distribution::exponential_truncated(2.0, 1.0);
  const double mass =
      integrate([](double x) { return 2.0 * std::exp(-2.0 * x); }, 0.0, 1.0, 1e-12);
  CHECK(expt.pdf(0.0) == doctest::Approx(2.0 / mass).epsilon(1e-9));
}

TEST_CASE("every density integrates to one") {
  for (const auto& law : density_kinds()) {
    const double total = integrate([&](double x) { return law.pdf(x); },
                                   law.support_lo(), law.support_hi(), 1e-10);
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("cdf is monotone and reaches one at the support top") {
  for (const auto& law : density_kinds()) {
    double prev = -1.0;
    const double lo = law.support_lo() - 0.1;
    const double hi = law.support_hi();
    for (int i = 0; i <= 200; ++i) {
      const double x = lo + (hi - lo) * double(i) / 200.0;
      const double f = law.cdf(x);
      CHECK(f >= prev - 1e-12);
      prev = f;
    }
    CHECK(law.cdf(law.support_hi()) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("pdf matches the cdf finite difference") {
  const double h = 1e-6;
  for (const auto& law : density_kinds()) {
    const double lo = law.support_lo(), hi = law.support_hi();
    for (double frac : {0.21, 0.47, 0.68}) {
      const double x = lo + frac * (hi - lo);
      const double fd = (law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h);
      const double tol = std::max(1e-3, 1e-3 * law.pdf(x));
      if (law.pdf(x) > 0.0 && law.pdf(x + 2 * h) > 0.0 && law.pdf(x - 2 * h) > 0.0)
        CHECK(std::abs(fd - law.pdf(x)) < tol);
    }
  }
}

TEST_CASE("Kolmogorov-Smirnov at the 99 percent level") {
  const int n = 100000;
  const double critical = 1.63 / std::sqrt(double(n));
  uint32_t entity = 0;
  for (const auto& law : density_kinds()) {
    RngStream rng(99, {0, 0, entity++, 0});
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = law.sample(rng);
    CHECK(ks_statistic(std::move(draws), law) < critical);
  }
}

TEST_CASE("identical substreams give bitwise identical draws") {
  auto law = Distribution::truncated_gaussian(0.5, 0.2, 0.0, 1.0);
  RngStream a(123, {1, 2, 3, 4});
  RngStream b(123, {1, 2, 3, 4});
  RngStream other(123, {1, 2, 3, 5});
  other.next_unit();  // consuming an unrelated stream must not matter
  std::vector<double> xs, ys;
  for (int i = 0; i < 64; ++i) {
    xs.push_back(law.sample(a));
    ys.push_back(law.sample(b));
  }
  CHECK(xs == ys);

  // Re-keying a stream reproduces it regardless of construction order.
  RngStream rekeyed = other.at({1, 2, 3, 4});
  for (int i = 0; i < 64; ++i) CHECK(law.sample(rekeyed) == xs[i]);
}

TEST_CASE("affine combination matches the convolution closed form") {
  auto law = c4_value_law();
  CHECK(law.support_lo() == doctest::Approx(2.0 / 3.0));
  CHECK(law.support_hi() == doctest::Approx(5.0 / 3.0));
  // Trapezoid density: rises on [2/3, 1], so F(1) = (9/4)(1/3)^2.
  CHECK(law.cdf(1.0) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(law.pdf(1.2) == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("invalid parameters rejected at construction") {
  CHECK_THROWS_AS(Distribution::uniform(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::uniform(-0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::truncated_gaussian(0.5, 0.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Distribution::truncated_gaussian(0.5, 0.2, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      Distribution::piecewise_uniform({{0.0, 1.0, 0.6}, {0.5, 2.0, 0.4}}),
      std::invalid_argument);  // overlap
  CHECK_THROWS_AS(Distribution::piecewise_uniform({{0.0, 1.0, 0.9}}),
                  std::invalid_argument);  // weights must sum to 1
  CHECK_THROWS_AS(Distribution::exponential_truncated(-1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Distribution::power_law_truncated(2.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Distribution::mixture({0.5}, {Distribution::uniform(0, 1),
                                                Distribution::uniform(0, 1)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      Distribution::affine_combination({1.0}, {Distribution::uniform(0, 1)}),
      std::invalid_argument);
  CHECK_THROWS_AS(Distribution::empirical({}), std::invalid_argument);
}

TEST_CASE("empirical law resamples its records") {
  auto law = Distribution::empirical({0.2, 0.4, 0.9});
  RngStream rng(3, {});
  for (int i = 0; i < 200; ++i) {
    const double x = law.sample(rng);
    CHECK((x == 0.2 || x == 0.4 || x == 0.9));
  }
  CHECK(law.cdf(0.4) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(law.pdf(0.4), std::logic_error);
}
