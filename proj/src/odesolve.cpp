#include "ddib/odesolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddib/error.hpp"

namespace ddib {

std::vector<int> SolveSpec::step_indices(const NoiseSchedule& s) const {
  const int last = s.steps() - 1;
  if (n_steps < 1 || n_steps > last) {
    throw ParameterError("n_steps must lie in [1, " + std::to_string(last) +
                         "], got " + std::to_string(n_steps));
  }
  std::vector<int> idx(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(
        std::lround(static_cast<double>(k) * last / n_steps));
  }
  return idx;
}

Eigen::MatrixXd DdimIntegrator::step(const NoisePredictor& net,
                                     const NoiseSchedule& s,
                                     const Eigen::MatrixXd& x, int t_from,
                                     int t_to) const {
  if (t_from == t_to) {
    throw ParameterError("DDIM step needs distinct endpoints, got t = " +
                         std::to_string(t_from) + " twice");
  }
  const double a_from = s.alpha_bar(t_from);
  const double a_to = s.alpha_bar(t_to);
  const double dsigma = sigma_from_alpha_bar(a_to) - sigma_from_alpha_bar(a_from);
  const Eigen::MatrixXd eps = net.predict_batch(s, x, t_from);
  Eigen::MatrixXd out = std::sqrt(a_to) * (x / std::sqrt(a_from) + dsigma * eps);
  if (!out.allFinite()) {
    throw NumericError("non-finite state in DDIM step " + std::to_string(t_from) +
                       " -> " + std::to_string(t_to));
  }
  return out;
}

Eigen::VectorXd ddim_step(const NoisePredictor& net, const NoiseSchedule& s,
                          const Eigen::VectorXd& x, int t_from, int t_to) {
  if (x.size() != net.dim()) throw ShapeError("ddim_step: dimension mismatch");
  Eigen::MatrixXd batch = x;
  return DdimIntegrator{}.step(net, s, batch, t_from, t_to).col(0);
}

SolveResult ode_solve(const NoisePredictor& net, const NoiseSchedule& s,
                      const Eigen::MatrixXd& x_start, const SolveSpec& spec,
                      bool keep_path, const Integrator& integrator) {
  if (x_start.rows() != net.dim()) {
    throw ShapeError("ode_solve: points are " + std::to_string(x_start.rows()) +
                     "-dimensional but the model is " + std::to_string(net.dim()) +
                     "-dimensional");
  }
  std::vector<int> idx = spec.step_indices(s);
  if (spec.direction == Direction::kReverse) {
    std::reverse(idx.begin(), idx.end());
  }
  SolveResult result;
  result.endpoint = x_start;
  if (keep_path) {
    result.path.push_back(x_start);
    result.path_steps.push_back(idx.front());
  }
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    result.endpoint = integrator.step(net, s, result.endpoint, idx[k], idx[k + 1]);
    if (keep_path) {
      result.path.push_back(result.endpoint);
      result.path_steps.push_back(idx[k + 1]);
    }
  }
  return result;
}

Eigen::VectorXd ode_solve(const NoisePredictor& net, const NoiseSchedule& s,
                          const Eigen::VectorXd& x_start, const SolveSpec& spec) {
  Eigen::MatrixXd batch = x_start;
  return ode_solve(net, s, batch, spec).endpoint.col(0);
}

Eigen::MatrixXd encode(const NoisePredictor& net, const NoiseSchedule& s,
                       const Eigen::MatrixXd& x0, int n_steps) {
  return ode_solve(net, s, x0, {n_steps, Direction::kForward}).endpoint;
}

Eigen::MatrixXd decode(const NoisePredictor& net, const NoiseSchedule& s,
                       const Eigen::MatrixXd& latent, int n_steps) {
  return ode_solve(net, s, latent, {n_steps, Direction::kReverse}).endpoint;
}

}  // namespace ddib
