#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "copa/rng.hpp"

namespace copa {

class Distribution;

namespace dist {

struct Uniform {
  double a, b;
};

struct TruncatedGaussian {
  double mean, sd, lo, hi;
  double z_lo, z_hi;  // standard normal cdf at the truncation points
};

struct Piece {
  double lo, hi, weight;
};

struct PiecewiseUniform {
  std::vector<Piece> pieces;       // sorted, disjoint
  std::vector<double> cum_weight;  // running sums, back() == 1
};

struct ExponentialTruncated {
  double rate, hi;
  double mass;  // 1 - exp(-rate*hi)
};

struct PowerLawTruncated {
  double exponent, lo, hi;  // density proportional to x^(-exponent) on [lo, hi]
};

struct Mixture {
  std::vector<double> weights;
  std::vector<double> cum_weight;
  std::vector<Distribution> parts;
};

// coef[0]*parts[0] + coef[1]*parts[1] with independent parts and
// nonnegative coefficients; exactly two components.
struct AffineCombination {
  std::vector<double> coef;
  std::vector<Distribution> parts;
};

struct PointMass {
  double value;
};

struct Empirical {
  std::shared_ptr<const std::vector<double>> sorted;  // ascending
};

using Body = std::variant<Uniform, TruncatedGaussian, PiecewiseUniform,
                          ExponentialTruncated, PowerLawTruncated, Mixture,
                          AffineCombination, PointMass, Empirical>;

}  // namespace dist

// A sampleable one-dimensional law on a bounded subset of [0, inf) with
// cdf/pdf access for quadrature. Invalid parameters are rejected here, at
// construction, never at sample time. Immutable afterwards and safe to
// share across threads.
class Distribution {
 public:
  static Distribution uniform(double a, double b);
  static Distribution truncated_gaussian(double mean, double sd, double lo, double hi);
  static Distribution piecewise_uniform(std::vector<dist::Piece> pieces);
  static Distribution exponential_truncated(double rate, double hi);
  static Distribution power_law_truncated(double exponent, double lo, double hi);
  static Distribution mixture(std::vector<double> weights, std::vector<Distribution> parts);
  static Distribution affine_combination(std::vector<double> coef, std::vector<Distribution> parts);
  static Distribution point_mass(double value);
  static Distribution empirical(std::vector<double> samples);

  double sample(RngStream& stream) const;
  double cdf(double x) const;

  // Density where it exists. Empirical laws have no density (throws); the
  // point mass returns 0 away from its atom.
  double pdf(double x) const;

  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  // True when the law has a bounded density usable by quadrature.
  bool has_density() const;
  bool is_point_mass() const;
  double atom() const;  // point-mass location

  const dist::Body& body() const { return *body_; }

 private:
  explicit Distribution(dist::Body body);

  std::shared_ptr<const dist::Body> body_;
  double lo_ = 0.0, hi_ = 0.0;
};

}  // namespace copa
