#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ddib/datasets.hpp"
#include "ddib/schedule.hpp"

namespace ddib {

/// Anything that predicts the noise component eps(x, t) of a perturbed
/// point. The integrator only sees this interface, so trained networks,
/// closed-form oracles and test fields are interchangeable.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual int dim() const = 0;
  /// x is dim x B (one point per column); returns dim x B.
  virtual Eigen::MatrixXd predict_batch(const NoiseSchedule& s,
                                        const Eigen::MatrixXd& x,
                                        int t) const = 0;
};

/// Layer sizes of the MLP
///   [x ; embed(t)] -> hidden_dims[0] -> ... -> hidden_dims[k-1] -> x-dim
/// with SiLU (x * sigmoid(x)) after every hidden layer and a linear output.
struct NetworkShape {
  int input_dim = 2;
  int time_embed_dim = 64;
  std::vector<int> hidden_dims{128, 128, 128, 128};

  /// Throws ParameterError for non-positive sizes or an odd embedding.
  void validate() const;
  std::size_t weight_count() const;
  bool operator==(const NetworkShape&) const = default;
};

/// Sinusoidal embedding of the continuous time t/(T-1), scaled by 1000 so
/// the frequency ladder spans the same range as integer-step embeddings.
/// Returns embed_dim x steps.size(): sines in the top half, cosines below.
Eigen::MatrixXd time_embedding(const NoiseSchedule& s,
                               std::span<const int> steps, int embed_dim);

/// Noise-prediction network eps_theta(x, t).
///
/// Weights live in one flat array, layer by layer: the column-major
/// out x in weight matrix followed by the out-vector bias.
class ScoreNetwork : public NoisePredictor {
 public:
  /// Intermediate activations kept by forward() for backward().
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of hidden layers
  };

  /// All-zero weights.
  explicit ScoreNetwork(NetworkShape shape);
  ScoreNetwork(NetworkShape shape, std::vector<double> weights);

  /// Uniform fan-in (Kaiming) init for hidden layers, zero biases, and a
  /// zero output layer so the initial noise prediction is identically 0.
  static ScoreNetwork initialized(NetworkShape shape, std::uint64_t seed);

  const NetworkShape& shape() const { return shape_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  void set_weights(std::vector<double> weights);

  int dim() const override { return shape_.input_dim; }
  Eigen::MatrixXd predict_batch(const NoiseSchedule& s,
                                const Eigen::MatrixXd& x,
                                int t) const override;

  /// Forward pass with an individual step per column.
  Eigen::MatrixXd forward(const NoiseSchedule& s, const Eigen::MatrixXd& x,
                          std::span<const int> steps,
                          Cache* cache = nullptr) const;

  /// Accumulates d(loss)/d(weights) into grad given d(loss)/d(output).
  void backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                std::vector<double>& grad) const;

 private:
  std::size_t layer_count() const { return shape_.hidden_dims.size() + 1; }
  int layer_in(std::size_t l) const;
  int layer_out(std::size_t l) const;
  std::size_t layer_offset(std::size_t l) const { return offsets_[l]; }

  NetworkShape shape_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
};

/// Single-point convenience wrapper around predict_batch.
Eigen::VectorXd predict_noise(const NoisePredictor& net,
                              const NoiseSchedule& s,
                              const Eigen::VectorXd& x, int t);

/// Exact optimal noise prediction for data ~ N(mu, var I):
///   eps*(x, t) = sqrt(1 - a) (x - sqrt(a) mu) / (a var + 1 - a),  a = alpha_bar[t].
Eigen::VectorXd analytic_gaussian_noise(const Eigen::VectorXd& mu, double var,
                                        const NoiseSchedule& s,
                                        const Eigen::VectorXd& x, int t);

/// NoisePredictor backed by analytic_gaussian_noise.
class GaussianNoiseOracle : public NoisePredictor {
 public:
  GaussianNoiseOracle(Eigen::VectorXd mu, double var);
  int dim() const override { return static_cast<int>(mu_.size()); }
  Eigen::MatrixXd predict_batch(const NoiseSchedule& s,
                                const Eigen::MatrixXd& x,
                                int t) const override;
  const Eigen::VectorXd& mean() const { return mu_; }
  double variance() const { return var_; }

 private:
  Eigen::VectorXd mu_;
  double var_;
};

/// One (t, eps) pair per batch column.
struct NoiseDraw {
  std::vector<int> steps;
  Eigen::MatrixXd eps;
};

NoiseDraw draw_noise(const NoiseSchedule& s, int dim, Eigen::Index batch,
                     std::mt19937_64& rng);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean over the batch of ||eps_theta(perturb(x0, t, eps), t) - eps||^2 / d
/// for a fixed draw, and its exact gradient.
LossAndGrad denoising_loss_and_grad(const ScoreNetwork& net,
                                    const NoiseSchedule& s,
                                    const Eigen::MatrixXd& batch,
                                    const NoiseDraw& draw);

/// Loss only (no gradient) for a fixed draw.
double denoising_loss(const ScoreNetwork& net, const NoiseSchedule& s,
                      const Eigen::MatrixXd& batch, const NoiseDraw& draw);

/// Draws steps uniformly and standard-normal noise from rng, then
/// evaluates the loss and gradient.
LossAndGrad denoising_loss_and_grad(const ScoreNetwork& net,
                                    const NoiseSchedule& s,
                                    const PointCloud& batch,
                                    std::mt19937_64& rng);

struct TrainConfig {
  int batch_size = 256;
  long iterations = 20000;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double ema_decay = 0.999;

  void validate() const;
};

/// Called after every optimizer step with the 1-based iteration and the
/// batch loss.
using TrainObserver = std::function<void(long iteration, double loss)>;

/// Adam on the denoising objective over `data` only; returns the EMA
/// shadow weights. Throws TrainingError on a non-finite loss.
ScoreNetwork train(const ScoreNetwork& initial, const NoiseSchedule& s,
                   const PointCloud& data, const TrainConfig& cfg,
                   const TrainObserver& observer = {});

}  // namespace ddib
