#pragma once

#include <vector>

#include <Eigen/Core>

#include "ddib/schedule.hpp"
#include "ddib/scorenet.hpp"

namespace ddib {

enum class Direction {
  kForward,  // data (step 0) -> latent (step T-1)
  kReverse,  // latent (step T-1) -> data (step 0)
};

/// Discretization of one probability-flow solve. n_steps integration steps
/// over n_steps + 1 step indices spaced with a uniform stride over
/// [0, T-1] (rounded to the nearest index); both endpoints are included.
struct SolveSpec {
  int n_steps = 500;
  Direction direction = Direction::kForward;

  /// Strictly increasing step indices, 0 first and T-1 last. Throws
  /// ParameterError unless 1 <= n_steps <= T-1.
  std::vector<int> step_indices(const NoiseSchedule& s) const;
};

/// Single-step update rule. The DDIM scheme is the only one shipped; higher
/// order schemes plug in here.
class Integrator {
 public:
  virtual ~Integrator() = default;
  virtual Eigen::MatrixXd step(const NoisePredictor& net, const NoiseSchedule& s,
                               const Eigen::MatrixXd& x, int t_from,
                               int t_to) const = 0;
};

/// x_to = sqrt(a_to) * ( x / sqrt(a_from) + (sigma_to - sigma_from) * eps(x, t_from) )
///
/// The noise is always evaluated at the starting point of the step: at the
/// less-noisy end when encoding and the noisier end when decoding. A
/// forward step followed by a reverse step is therefore exact only when
/// eps does not depend on (x, t); otherwise the pair leaves an O(h^2)
/// residual, which is the whole round-trip error of an encode/decode.
class DdimIntegrator final : public Integrator {
 public:
  Eigen::MatrixXd step(const NoisePredictor& net, const NoiseSchedule& s,
                       const Eigen::MatrixXd& x, int t_from,
                       int t_to) const override;
};

/// DDIM step on a single point. Throws ParameterError when t_from == t_to
/// and NumericError if the result is not finite.
Eigen::VectorXd ddim_step(const NoisePredictor& net, const NoiseSchedule& s,
                          const Eigen::VectorXd& x, int t_from, int t_to);

struct SolveResult {
  Eigen::MatrixXd endpoint;  // dim x B
  /// When requested: the state at every visited step index, in visiting
  /// order (path.front() is the input, path.back() the endpoint).
  std::vector<Eigen::MatrixXd> path;
  std::vector<int> path_steps;
};

/// Integrates a batch (dim x B) along spec. Deterministic; columns are
/// independent of one another.
SolveResult ode_solve(const NoisePredictor& net, const NoiseSchedule& s,
                      const Eigen::MatrixXd& x_start, const SolveSpec& spec,
                      bool keep_path = false,
                      const Integrator& integrator = DdimIntegrator{});

Eigen::VectorXd ode_solve(const NoisePredictor& net, const NoiseSchedule& s,
                          const Eigen::VectorXd& x_start, const SolveSpec& spec);

/// Data -> latent: forward solve from step 0 to T-1. The latent is the
/// raw state x at step T-1, not x / sqrt(alpha_bar).
Eigen::MatrixXd encode(const NoisePredictor& net, const NoiseSchedule& s,
                       const Eigen::MatrixXd& x0, int n_steps);

/// Latent -> data: reverse solve from step T-1 to 0.
Eigen::MatrixXd decode(const NoisePredictor& net, const NoiseSchedule& s,
                       const Eigen::MatrixXd& latent, int n_steps);

}  // namespace ddib
