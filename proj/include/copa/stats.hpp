#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace copa {

// Pairwise (tree) summation with fixed fan-in: the result depends only on
// the element order, never on chunking, so reductions are reproducible.
inline double pairwise_sum(std::span<const double> xs) {
  const size_t n = xs.size();
  if (n <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

inline MeanSe mean_and_se(std::span<const double> xs) {
  const size_t n = xs.size();
  if (n == 0) return {};
  const double mean = pairwise_sum(xs) / double(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = xs[i] - mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / double(n - 1);
  return {mean, std::sqrt(var / double(n))};
}

// Welford accumulator for streaming mean/variance.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / double(n_);
    m2_ += d * (x - mean_);
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
  double population_variance() const { return n_ > 0 ? m2_ / double(n_) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace copa
