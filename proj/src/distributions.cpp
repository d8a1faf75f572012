#include "copa/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "copa/quadrature.hpp"

namespace copa {

namespace {

constexpr double kWeightTol = 1e-12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Acklam's rational approximation for the standard normal quantile,
// polished with one Halley step against erfc.
double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("distribution: " + msg);
}

}  // namespace

Distribution::Distribution(dist::Body body)
    : body_(std::make_shared<const dist::Body>(std::move(body))) {
  struct Support {
    std::pair<double, double> operator()(const dist::Uniform& u) const {
      return {u.a, u.b};
    }
    std::pair<double, double> operator()(const dist::TruncatedGaussian& g) const {
      return {g.lo, g.hi};
    }
    std::pair<double, double> operator()(const dist::PiecewiseUniform& p) const {
      return {p.pieces.front().lo, p.pieces.back().hi};
    }
    std::pair<double, double> operator()(const dist::ExponentialTruncated& e) const {
      return {0.0, e.hi};
    }
    std::pair<double, double> operator()(const dist::PowerLawTruncated& p) const {
      return {p.lo, p.hi};
    }
    std::pair<double, double> operator()(const dist::Mixture& m) const {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& part : m.parts) {
        lo = std::min(lo, part.support_lo());
        hi = std::max(hi, part.support_hi());
      }
      return {lo, hi};
    }
    std::pair<double, double> operator()(const dist::AffineCombination& a) const {
      double lo = 0.0, hi = 0.0;
      for (size_t i = 0; i < a.parts.size(); ++i) {
        lo += a.coef[i] * a.parts[i].support_lo();
        hi += a.coef[i] * a.parts[i].support_hi();
      }
      return {lo, hi};
    }
    std::pair<double, double> operator()(const dist::PointMass& p) const {
      return {p.value, p.value};
    }
    std::pair<double, double> operator()(const dist::Empirical& e) const {
      return {e.sorted->front(), e.sorted->back()};
    }
  };
  auto [lo, hi] = std::visit(Support{}, *body_);
  lo_ = lo;
  hi_ = hi;
}

Distribution Distribution::uniform(double a, double b) {
  if (!(a < b)) fail("uniform needs a < b");
  if (a < 0.0) fail("support must lie in [0, inf)");
  if (!std::isfinite(b)) fail("support must be bounded");
  return Distribution(dist::Uniform{a, b});
}

Distribution Distribution::truncated_gaussian(double mean, double sd, double lo,
                                              double hi) {
  if (!(sd > 0.0)) fail("truncated-gaussian needs sd > 0");
  if (!(lo < hi)) fail("truncated-gaussian needs lo < hi");
  if (lo < 0.0) fail("support must lie in [0, inf)");
  if (!std::isfinite(hi)) fail("support must be bounded");
  const double z_lo = normal_cdf((lo - mean) / sd);
  const double z_hi = normal_cdf((hi - mean) / sd);
  if (!(z_hi - z_lo > 0.0)) fail("truncated-gaussian carries no mass on [lo, hi]");
  return Distribution(dist::TruncatedGaussian{mean, sd, lo, hi, z_lo, z_hi});
}

Distribution Distribution::piecewise_uniform(std::vector<dist::Piece> pieces) {
  if (pieces.empty()) fail("piecewise-uniform needs at least one interval");
  std::sort(pieces.begin(), pieces.end(),
            [](const auto& x, const auto& y) { return x.lo < y.lo; });
  double total = 0.0;
  for (size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!(p.lo < p.hi)) fail("piecewise-uniform interval needs lo < hi");
    if (p.lo < 0.0) fail("support must lie in [0, inf)");
    if (!(p.weight > 0.0)) fail("piecewise-uniform weights must be positive");
    if (i > 0 && p.lo < pieces[i - 1].hi) fail("piecewise-uniform intervals overlap");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > kWeightTol) fail("piecewise-uniform weights must sum to 1");
  std::vector<double> cum(pieces.size());
  double run = 0.0;
  for (size_t i = 0; i < pieces.size(); ++i) {
    run += pieces[i].weight;
    cum[i] = run;
  }
  cum.back() = 1.0;
  return Distribution(dist::PiecewiseUniform{std::move(pieces), std::move(cum)});
}

Distribution Distribution::exponential_truncated(double rate, double hi) {
  if (!(rate > 0.0)) fail("exponential-truncated needs rate > 0");
  if (!(hi > 0.0) || !std::isfinite(hi)) fail("exponential-truncated needs finite hi > 0");
  return Distribution(dist::ExponentialTruncated{rate, hi, 1.0 - std::exp(-rate * hi)});
}

Distribution Distribution::power_law_truncated(double exponent, double lo, double hi) {
  if (!(lo > 0.0)) fail("power-law-truncated needs lo > 0");
  if (!(hi > lo) || !std::isfinite(hi)) fail("power-law-truncated needs finite hi > lo");
  if (!(exponent > 0.0)) fail("power-law-truncated needs exponent > 0");
  return Distribution(dist::PowerLawTruncated{exponent, lo, hi});
}

Distribution Distribution::mixture(std::vector<double> weights,
                                   std::vector<Distribution> parts) {
  if (weights.empty() || weights.size() != parts.size())
    fail("mixture needs matching weights and components");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) fail("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTol) fail("mixture weights must sum to 1");
  std::vector<double> cum(weights.size());
  double run = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    run += weights[i];
    cum[i] = run;
  }
  cum.back() = 1.0;
  return Distribution(dist::Mixture{std::move(weights), std::move(cum), std::move(parts)});
}

Distribution Distribution::affine_combination(std::vector<double> coef,
                                              std::vector<Distribution> parts) {
  if (coef.size() != 2 || parts.size() != 2)
    fail("affine-combination supports exactly two independent components");
  for (double c : coef)
    if (!(c >= 0.0)) fail("affine-combination coefficients must be nonnegative");
  if (!(coef[0] + coef[1] > 0.0)) fail("affine-combination needs a nonzero coefficient");
  for (const auto& part : parts)
    if (!part.has_density()) fail("affine-combination components need densities");
  return Distribution(dist::AffineCombination{std::move(coef), std::move(parts)});
}

Distribution Distribution::point_mass(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) fail("point-mass needs a finite value >= 0");
  return Distribution(dist::PointMass{value});
}

Distribution Distribution::empirical(std::vector<double> samples) {
  if (samples.empty()) fail("empirical needs at least one sample");
  std::sort(samples.begin(), samples.end());
  if (samples.front() < 0.0) fail("support must lie in [0, inf)");
  if (!std::isfinite(samples.back())) fail("support must be bounded");
  return Distribution(
      dist::Empirical{std::make_shared<const std::vector<double>>(std::move(samples))});
}

double Distribution::sample(RngStream& stream) const {
  struct Sampler {
    RngStream& s;
    double operator()(const dist::Uniform& u) const {
      return u.a + s.next_unit() * (u.b - u.a);
    }
    double operator()(const dist::TruncatedGaussian& g) const {
      const double p = g.z_lo + s.next_unit() * (g.z_hi - g.z_lo);
      const double x = g.mean + g.sd * normal_quantile(p);
      return std::clamp(x, g.lo, g.hi);
    }
    double operator()(const dist::PiecewiseUniform& p) const {
      const double u = s.next_unit();
      size_t i = std::lower_bound(p.cum_weight.begin(), p.cum_weight.end(), u) -
                 p.cum_weight.begin();
      if (i >= p.pieces.size()) i = p.pieces.size() - 1;
      const double prev = i == 0 ? 0.0 : p.cum_weight[i - 1];
      const double frac = (u - prev) / p.pieces[i].weight;
      return p.pieces[i].lo + frac * (p.pieces[i].hi - p.pieces[i].lo);
    }
    double operator()(const dist::ExponentialTruncated& e) const {
      const double u = s.next_unit();
      return -std::log1p(-u * e.mass) / e.rate;
    }
    double operator()(const dist::PowerLawTruncated& p) const {
      const double u = s.next_unit();
      if (std::abs(p.exponent - 1.0) < 1e-12) {
        return p.lo * std::pow(p.hi / p.lo, u);
      }
      const double e1 = 1.0 - p.exponent;
      const double lo_p = std::pow(p.lo, e1);
      const double hi_p = std::pow(p.hi, e1);
      return std::pow(lo_p + u * (hi_p - lo_p), 1.0 / e1);
    }
    double operator()(const dist::Mixture& m) const {
      const double u = s.next_unit();
      size_t i = std::lower_bound(m.cum_weight.begin(), m.cum_weight.end(), u) -
                 m.cum_weight.begin();
      if (i >= m.parts.size()) i = m.parts.size() - 1;
      return m.parts[i].sample(s);
    }
    double operator()(const dist::AffineCombination& a) const {
      double x = 0.0;
      for (size_t i = 0; i < a.parts.size(); ++i) x += a.coef[i] * a.parts[i].sample(s);
      return x;
    }
    double operator()(const dist::PointMass& p) const { return p.value; }
    double operator()(const dist::Empirical& e) const {
      const size_t n = e.sorted->size();
      size_t i = size_t(s.next_unit() * double(n));
      if (i >= n) i = n - 1;
      return (*e.sorted)[i];
    }
  };
  return std::visit(Sampler{stream}, *body_);
}

double Distribution::cdf(double x) const {
  struct Cdf {
    double x;
    double operator()(const dist::Uniform& u) const {
      if (x <= u.a) return 0.0;
      if (x >= u.b) return 1.0;
      return (x - u.a) / (u.b - u.a);
    }
    double operator()(const dist::TruncatedGaussian& g) const {
      if (x <= g.lo) return 0.0;
      if (x >= g.hi) return 1.0;
      return (normal_cdf((x - g.mean) / g.sd) - g.z_lo) / (g.z_hi - g.z_lo);
    }
    double operator()(const dist::PiecewiseUniform& p) const {
      double acc = 0.0;
      for (const auto& piece : p.pieces) {
        if (x >= piece.hi) {
          acc += piece.weight;
        } else if (x > piece.lo) {
          acc += piece.weight * (x - piece.lo) / (piece.hi - piece.lo);
          break;
        } else {
          break;
        }
      }
      return std::min(acc, 1.0);
    }
    double operator()(const dist::ExponentialTruncated& e) const {
      if (x <= 0.0) return 0.0;
      if (x >= e.hi) return 1.0;
      return (1.0 - std::exp(-e.rate * x)) / e.mass;
    }
    double operator()(const dist::PowerLawTruncated& p) const {
      if (x <= p.lo) return 0.0;
      if (x >= p.hi) return 1.0;
      if (std::abs(p.exponent - 1.0) < 1e-12) {
        return std::log(x / p.lo) / std::log(p.hi / p.lo);
      }
      const double e1 = 1.0 - p.exponent;
      const double lo_p = std::pow(p.lo, e1);
      const double hi_p = std::pow(p.hi, e1);
      return (std::pow(x, e1) - lo_p) / (hi_p - lo_p);
    }
    double operator()(const dist::Mixture& m) const {
      double acc = 0.0;
      for (size_t i = 0; i < m.parts.size(); ++i) acc += m.weights[i] * m.parts[i].cdf(x);
      return acc;
    }
    double operator()(const dist::AffineCombination& a) const {
      // P(c0 A + c1 B <= x); integrate over the component with a density.
      const auto& A = a.parts[0];
      const auto& B = a.parts[1];
      const double c0 = a.coef[0], c1 = a.coef[1];
      if (c1 == 0.0) return A.cdf(x / c0);
      if (c0 == 0.0) return B.cdf(x / c1);
      auto integrand = [&](double t) { return A.pdf(t) * B.cdf((x - c0 * t) / c1); };
      return std::clamp(
          integrate(integrand, A.support_lo(), A.support_hi(), 1e-11), 0.0, 1.0);
    }
    double operator()(const dist::PointMass& p) const { return x >= p.value ? 1.0 : 0.0; }
    double operator()(const dist::Empirical& e) const {
      const auto& v = *e.sorted;
      return double(std::upper_bound(v.begin(), v.end(), x) - v.begin()) /
             double(v.size());
    }
  };
  return std::visit(Cdf{x}, *body_);
}

double Distribution::pdf(double x) const {
  struct Pdf {
    double x;
    double operator()(const dist::Uniform& u) const {
      return (x >= u.a && x <= u.b) ? 1.0 / (u.b - u.a) : 0.0;
    }
    double operator()(const dist::TruncatedGaussian& g) const {
      if (x < g.lo || x > g.hi) return 0.0;
      return normal_pdf((x - g.mean) / g.sd) / (g.sd * (g.z_hi - g.z_lo));
    }
    double operator()(const dist::PiecewiseUniform& p) const {
      for (const auto& piece : p.pieces) {
        if (x >= piece.lo && x <= piece.hi)
          return piece.weight / (piece.hi - piece.lo);
      }
      return 0.0;
    }
    double operator()(const dist::ExponentialTruncated& e) const {
      if (x < 0.0 || x > e.hi) return 0.0;
      return e.rate * std::exp(-e.rate * x) / e.mass;
    }
    double operator()(const dist::PowerLawTruncated& p) const {
      if (x < p.lo || x > p.hi) return 0.0;
      double norm;
      if (std::abs(p.exponent - 1.0) < 1e-12) {
        norm = std::log(p.hi / p.lo);
      } else {
        const double e1 = 1.0 - p.exponent;
        norm = (std::pow(p.hi, e1) - std::pow(p.lo, e1)) / e1;
      }
      return std::pow(x, -p.exponent) / norm;
    }
    double operator()(const dist::Mixture& m) const {
      double acc = 0.0;
      for (size_t i = 0; i < m.parts.size(); ++i) acc += m.weights[i] * m.parts[i].pdf(x);
      return acc;
    }
    double operator()(const dist::AffineCombination& a) const {
      const auto& A = a.parts[0];
      const auto& B = a.parts[1];
      const double c0 = a.coef[0], c1 = a.coef[1];
      if (c1 == 0.0) return A.pdf(x / c0) / c0;
      if (c0 == 0.0) return B.pdf(x / c1) / c1;
      auto integrand = [&](double t) { return A.pdf(t) * B.pdf((x - c0 * t) / c1) / c1; };
      return std::max(0.0, integrate(integrand, A.support_lo(), A.support_hi(), 1e-11));
    }
    double operator()(const dist::PointMass& p) const {
      return x == p.value ? std::numeric_limits<double>::infinity() : 0.0;
    }
    [[noreturn]] double operator()(const dist::Empirical&) const {
      throw std::logic_error("empirical distribution has no density");
    }
  };
  return std::visit(Pdf{x}, *body_);
}

bool Distribution::has_density() const {
  if (std::holds_alternative<dist::PointMass>(*body_)) return false;
  if (std::holds_alternative<dist::Empirical>(*body_)) return false;
  if (const auto* m = std::get_if<dist::Mixture>(body_.get())) {
    for (const auto& p : m->parts)
      if (!p.has_density()) return false;
  }
  return true;
}

bool Distribution::is_point_mass() const {
  return std::holds_alternative<dist::PointMass>(*body_);
}

double Distribution::atom() const {
  return std::get<dist::PointMass>(*body_).value;
}

}  // namespace copa
