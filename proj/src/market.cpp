#include "copa/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace copa {

namespace {
[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("market: " + msg);
}
}  // namespace

StepSchedule StepSchedule::inverse_sqrt(double c) {
  if (!(c > 0.0)) fail("step schedule needs c > 0");
  return StepSchedule{c};
}

double StepSchedule::epsilon(int horizon) const {
  return c / std::sqrt(double(horizon));
}

Eigen::VectorXd MarketConfig::rhos() const {
  Eigen::VectorXd r(size());
  for (int k = 0; k < size(); ++k) r[k] = bidders[k].rho;
  return r;
}

Eigen::VectorXd MarketConfig::effective_rhos() const {
  Eigen::VectorXd r(size());
  for (int k = 0; k < size(); ++k) r[k] = bidders[k].effective_rho();
  return r;
}

Eigen::VectorXd MarketConfig::caps() const {
  Eigen::VectorXd r(size());
  for (int k = 0; k < size(); ++k) r[k] = bidders[k].multiplier_cap;
  return r;
}

Eigen::VectorXd MarketConfig::value_hi() const {
  Eigen::VectorXd r(size());
  for (int k = 0; k < size(); ++k) r[k] = bidders[k].value_dist.support_hi();
  return r;
}

Eigen::VectorXd MarketConfig::initial_vector() const {
  if (initial_multipliers.size() == size()) return initial_multipliers;
  if (initial_multipliers.size() == 1)
    return Eigen::VectorXd::Constant(size(), initial_multipliers[0]);
  if (initial_multipliers.size() == 0) return Eigen::VectorXd::Zero(size());
  fail("initial multipliers must have size 1 or K");
}

void MarketConfig::validate() const {
  if (bidders.empty()) fail("need at least one bidder");
  if (horizon < 1) fail("horizon must be >= 1");
  const double eps = step.epsilon(horizon);
  for (size_t k = 0; k < bidders.size(); ++k) {
    const auto& b = bidders[k];
    const double v_hi = b.value_dist.support_hi();
    const std::string tag = "bidder " + std::to_string(k) + ": ";
    if (!(v_hi > 0.0)) fail(tag + "value support must extend above 0");
    if (!(b.rho > 0.0) || !(b.rho < v_hi)) fail(tag + "rho must lie in (0, value support hi)");
    if (b.reported_rho) {
      if (!(*b.reported_rho > 0.0) || !(*b.reported_rho <= b.rho))
        fail(tag + "reported rho must lie in (0, rho]");
    }
    if (!(b.multiplier_cap >= v_hi / b.effective_rho()))
      fail(tag + "multiplier cap must be >= value_hi / rho");
    if (!(v_hi * eps < 1.0)) fail(tag + "step size too large: value_hi * epsilon >= 1");
  }
  const Eigen::VectorXd init = initial_vector();
  for (int k = 0; k < size(); ++k) {
    if (!(init[k] >= 0.0) || !(init[k] <= bidders[k].multiplier_cap))
      fail("initial multiplier outside [0, cap]");
  }
  if (!(outside.support_hi() >= 0.0)) fail("outside-bid law must live on [0, inf)");
}

}  // namespace copa
