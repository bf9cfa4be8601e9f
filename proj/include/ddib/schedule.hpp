#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace ddib {

/// Discrete variance-preserving noise schedule.
///
/// Step indices run over [0, T). The continuous time of the VP SDE
/// dx = -(beta/2) x dt + sqrt(beta) dw maps onto step i through
/// t = i / (T - 1). alpha_bar(i) is the signal retention of the marginal
/// kernel q(x_i | x_0) = N(sqrt(alpha_bar) x_0, (1 - alpha_bar) I) and
/// sigma(i) = sqrt((1 - alpha_bar) / alpha_bar) is the noise-to-signal
/// ratio that parameterizes the DDIM integrator.
///
/// Immutable after construction.
class NoiseSchedule {
 public:
  /// Floor applied to alpha_bar so that sigma stays finite.
  static constexpr double kAlphaBarFloor = 1e-8;

  /// beta linearly interpolated from beta_min to beta_max over T steps.
  /// Requires T >= 2 and 0 < beta_min <= beta_max < 1.
  static NoiseSchedule linear(int steps, double beta_min, double beta_max);

  /// DDPM defaults: T = 1000, beta in [1e-4, 0.02].
  static NoiseSchedule default_linear() { return linear(1000, 1e-4, 0.02); }

  int steps() const { return static_cast<int>(beta_.size()); }
  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }
  double beta(int t) const;
  double alpha_bar(int t) const;
  double sigma(int t) const;
  const std::vector<double>& betas() const { return beta_; }
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

  /// Continuous time in [0, 1] for step index t.
  double time_of(int t) const;

  /// FNV-1a hash over the beta sequence; equal schedules hash equal.
  std::uint64_t fingerprint() const;

  bool operator==(const NoiseSchedule& other) const {
    return beta_ == other.beta_;
  }

 private:
  NoiseSchedule() = default;
  void check_step(int t) const;

  double beta_min_ = 0.0;
  double beta_max_ = 0.0;
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

/// sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * eps.
Eigen::VectorXd perturb(const NoiseSchedule& s, const Eigen::VectorXd& x0,
                        int t, const Eigen::VectorXd& eps);

/// sigma(t) = sqrt((1 - alpha_bar[t]) / alpha_bar[t]).
double sigma_of(const NoiseSchedule& s, int t);

/// The same map on a raw alpha_bar value; throws SingularityError for
/// alpha_bar <= 0.
double sigma_from_alpha_bar(double alpha_bar);

}  // namespace ddib
