#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "copa/estimators.hpp"
#include "copa/market.hpp"

namespace copa {

// Expected-expenditure vector field with its box and targets; pluggable so
// solvers run against market-backed estimates, exact discrete enumerations,
// or synthetic stubs alike.
struct ExpenditureMap {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> G;
  Eigen::VectorXd rhos;
  Eigen::VectorXd caps;
  int size() const { return int(rhos.size()); }
};

struct EquilibriumResult {
  Eigen::VectorXd multipliers;       // lambda* or xi*; for HP solves, lambda*
  Eigen::VectorXd external;          // mu* (HP only, empty otherwise)
  Eigen::VectorXd residual;          // |mult_k * (rho_k - G_k)|
  Eigen::VectorXd slack;             // max(0, G_k - rho_k)
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd hp_derivative;     // finite-difference dG^HP/dmu diagnostic
};

// How market-backed G maps evaluate their expectations.
struct EstimationMethod {
  enum class Kind { MonteCarlo, Quadrature } kind = Kind::MonteCarlo;
  int samples = 100000;
  double tol = 1e-9;
  uint64_t seed = 1;
  static EstimationMethod monte_carlo(int samples, uint64_t seed) {
    return {Kind::MonteCarlo, samples, 1e-9, seed};
  }
  static EstimationMethod quadrature(double tol) {
    return {Kind::Quadrature, 0, tol, 0};
  }
};

ExpenditureMap make_expenditure_map(Family family, const MarketConfig& market,
                                    const EstimationMethod& method);

// Projected fixed-point iteration x <- P_[0,cap](x - eta_n (rho - G(x))) with
// eta_n = eta0 / sqrt(n). Non-convergence returns the best iterate with
// converged = false.
EquilibriumResult solve_ncp(const ExpenditureMap& map, double tolerance,
                            int max_iter = 20000, double eta0 = 0.1);

EquilibriumResult solve_ncp(Family family, const MarketConfig& market,
                            const EstimationMethod& method, double tolerance,
                            int max_iter = 20000,
                            std::optional<double> gamma_hint = std::nullopt);

// Per-coordinate bisection of G^HP_k(mu_k, lambda*) = rho_k on [0, lambda*_k];
// clamped to 0 when already slack, flagged at lambda*_k when non-bracketing.
EquilibriumResult solve_hp_equilibrium(const MarketConfig& market,
                                       const Eigen::VectorXd& lambda_star,
                                       const EstimationMethod& method,
                                       double tolerance);

enum class PairPolicy {
  AxisAdjacent,  // neighbouring grid points along one coordinate (the
                 // "marginal" parameter reported in experiments)
  AllPairs,      // exhaustive pairs inside the box
  Sampled,       // random pairs, for K > 2
};

struct MonotonicityReport {
  double grid_width = 0.0;
  double gamma_hat = 0.0;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> argmin;
};

MonotonicityReport check_monotonicity(const ExpenditureMap& map,
                                      const Eigen::VectorXd& box_lo,
                                      const Eigen::VectorXd& box_hi,
                                      double grid_width,
                                      PairPolicy policy = PairPolicy::AxisAdjacent,
                                      int sampled_pairs = 100000,
                                      uint64_t seed = 1);

// Per-bidder per-round expected utilities at a solved equilibrium.
std::vector<Estimate> equilibrium_utilities(Family family,
                                            const EquilibriumResult& result,
                                            const MarketConfig& market,
                                            const EstimationMethod& method);

}  // namespace copa
