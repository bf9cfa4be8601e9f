#include "ddib/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddib/error.hpp"

namespace ddib {

NoiseSchedule NoiseSchedule::linear(int steps, double beta_min,
                                    double beta_max) {
  if (steps < 2) {
    throw ParameterError("noise schedule needs at least 2 steps, got " +
                         std::to_string(steps));
  }
  if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0)) {
    throw ParameterError(
        "noise schedule needs 0 < beta_min <= beta_max < 1");
  }
  NoiseSchedule s;
  s.beta_min_ = beta_min;
  s.beta_max_ = beta_max;
  s.beta_.resize(steps);
  s.alpha_bar_.resize(steps);
  double prod = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = static_cast<double>(i) / (steps - 1);
    s.beta_[i] = beta_min + (beta_max - beta_min) * frac;
    prod *= 1.0 - s.beta_[i];
    s.alpha_bar_[i] = std::max(prod, kAlphaBarFloor);
  }
  return s;
}

void NoiseSchedule::check_step(int t) const {
  if (t < 0 || t >= steps()) {
    throw ParameterError("step index " + std::to_string(t) +
                         " outside [0, " + std::to_string(steps()) + ")");
  }
}

double NoiseSchedule::beta(int t) const {
  check_step(t);
  return beta_[t];
}

double NoiseSchedule::alpha_bar(int t) const {
  check_step(t);
  return alpha_bar_[t];
}

double NoiseSchedule::sigma(int t) const {
  return sigma_from_alpha_bar(alpha_bar(t));
}

double NoiseSchedule::time_of(int t) const {
  check_step(t);
  return static_cast<double>(t) / (steps() - 1);
}

std::uint64_t NoiseSchedule::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t count = beta_.size();
  mix(&count, sizeof count);
  mix(beta_.data(), beta_.size() * sizeof(double));
  return h;
}

double sigma_from_alpha_bar(double alpha_bar) {
  if (!(alpha_bar > 0.0)) {
    throw SingularityError("sigma is undefined for alpha_bar = " +
                           std::to_string(alpha_bar));
  }
  return std::sqrt((1.0 - alpha_bar) / alpha_bar);
}

double sigma_of(const NoiseSchedule& s, int t) { return s.sigma(t); }

Eigen::VectorXd perturb(const NoiseSchedule& s, const Eigen::VectorXd& x0,
                        int t, const Eigen::VectorXd& eps) {
  if (x0.size() != eps.size()) {
    throw ShapeError("perturb: x0 has dimension " +
                     std::to_string(x0.size()) + " but eps has " +
                     std::to_string(eps.size()));
  }
  const double ab = s.alpha_bar(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

}  // namespace ddib
