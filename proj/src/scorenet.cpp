#include "ddib/scorenet.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ddib/error.hpp"

namespace ddib {

namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
  return 1.0 / (1.0 + (-z).exp());
}

}  // namespace

void NetworkShape::validate() const {
  if (input_dim <= 0) throw ParameterError("network input_dim must be positive");
  if (time_embed_dim < 0 || time_embed_dim % 2 != 0) {
    throw ParameterError("time_embed_dim must be a non-negative even number");
  }
  for (int h : hidden_dims) {
    if (h <= 0) throw ParameterError("hidden layer widths must be positive");
  }
}

std::size_t NetworkShape::weight_count() const {
  std::size_t count = 0;
  int in = input_dim + time_embed_dim;
  for (int h : hidden_dims) {
    count += static_cast<std::size_t>(h) * in + h;
    in = h;
  }
  count += static_cast<std::size_t>(input_dim) * in + input_dim;
  return count;
}

Eigen::MatrixXd time_embedding(const NoiseSchedule& s,
                               std::span<const int> steps, int embed_dim) {
  const int half = embed_dim / 2;
  Eigen::MatrixXd emb(embed_dim, static_cast<Eigen::Index>(steps.size()));
  for (std::size_t j = 0; j < steps.size(); ++j) {
    const double pos = 1000.0 * s.time_of(steps[j]);
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * k / half);
      emb(k, static_cast<Eigen::Index>(j)) = std::sin(pos * freq);
      emb(half + k, static_cast<Eigen::Index>(j)) = std::cos(pos * freq);
    }
  }
  return emb;
}

ScoreNetwork::ScoreNetwork(NetworkShape shape)
    : ScoreNetwork(shape, std::vector<double>(shape.weight_count(), 0.0)) {}

ScoreNetwork::ScoreNetwork(NetworkShape shape, std::vector<double> weights)
    : shape_(std::move(shape)) {
  shape_.validate();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
  }
  set_weights(std::move(weights));
}

void ScoreNetwork::set_weights(std::vector<double> weights) {
  if (weights.size() != shape_.weight_count()) {
    throw ShapeError("network expects " + std::to_string(shape_.weight_count()) +
                     " weights, got " + std::to_string(weights.size()));
  }
  weights_ = std::move(weights);
}

int ScoreNetwork::layer_in(std::size_t l) const {
  return l == 0 ? shape_.input_dim + shape_.time_embed_dim
                : shape_.hidden_dims[l - 1];
}

int ScoreNetwork::layer_out(std::size_t l) const {
  return l + 1 == layer_count() ? shape_.input_dim : shape_.hidden_dims[l];
}

ScoreNetwork ScoreNetwork::initialized(NetworkShape shape, std::uint64_t seed) {
  ScoreNetwork net(std::move(shape));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.layer_count(); ++l) {
    const int in = net.layer_in(l);
    const double bound = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t n = static_cast<std::size_t>(net.layer_out(l)) * in;
    for (std::size_t i = 0; i < n; ++i) {
      net.weights_[net.offsets_[l] + i] = dist(rng);
    }
  }
  return net;
}

Eigen::MatrixXd ScoreNetwork::forward(const NoiseSchedule& s,
                                      const Eigen::MatrixXd& x,
                                      std::span<const int> steps,
                                      Cache* cache) const {
  if (x.rows() != shape_.input_dim) {
    throw ShapeError("network expects " + std::to_string(shape_.input_dim) +
                     "-dimensional points, got " + std::to_string(x.rows()));
  }
  if (static_cast<std::size_t>(x.cols()) != steps.size()) {
    throw ShapeError("one step index per batch column required");
  }
  Eigen::MatrixXd h(shape_.input_dim + shape_.time_embed_dim, x.cols());
  h.topRows(shape_.input_dim) = x;
  if (shape_.time_embed_dim > 0) {
    h.bottomRows(shape_.time_embed_dim) =
        time_embedding(s, steps, shape_.time_embed_dim);
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  for (std::size_t l = 0; l < layer_count(); ++l) {
    // Copies, not maps: vectorized kernels peel by address, so products
    // over a map into weights_ would round differently per allocation.
    const double* base = weights_.data() + offsets_[l];
    const Eigen::MatrixXd w = ConstMatMap(base, layer_out(l), layer_in(l));
    const Eigen::VectorXd b =
        ConstVecMap(base + static_cast<std::size_t>(layer_out(l)) * layer_in(l), layer_out(l));
    Eigen::MatrixXd z = w * h;
    z.colwise() += b;
    if (cache) cache->inputs.push_back(std::move(h));
    if (l + 1 == layer_count()) return z;
    h = (z.array() * sigmoid(z.array())).matrix();
    if (cache) cache->pre.push_back(std::move(z));
  }
  return h;  // unreachable: the output layer returns above
}

void ScoreNetwork::backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                            std::vector<double>& grad) const {
  if (grad.size() != weights_.size()) grad.assign(weights_.size(), 0.0);
  Eigen::MatrixXd d = d_out;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const int in = layer_in(l);
    const int out = layer_out(l);
    const std::size_t off = offsets_[l];
    MatMap gw(grad.data() + off, out, in);
    VecMap gb(grad.data() + off + static_cast<std::size_t>(out) * in, out);
    const Eigen::MatrixXd dw = d * cache.inputs[l].transpose();
    const Eigen::VectorXd db = d.rowwise().sum();
    gw += dw;
    gb += db;
    if (l == 0) break;
    const Eigen::MatrixXd w = ConstMatMap(weights_.data() + off, out, in);
    const Eigen::ArrayXXd z = cache.pre[l - 1].array();
    const Eigen::ArrayXXd sg = sigmoid(z);
    const Eigen::MatrixXd dh = w.transpose() * d;
    d = (dh.array() * (sg * (1.0 + z * (1.0 - sg)))).matrix();
  }
}

Eigen::MatrixXd ScoreNetwork::predict_batch(const NoiseSchedule& s,
                                            const Eigen::MatrixXd& x,
                                            int t) const {
  const std::vector<int> steps(static_cast<std::size_t>(x.cols()), t);
  return forward(s, x, steps);
}

Eigen::VectorXd predict_noise(const NoisePredictor& net, const NoiseSchedule& s,
                              const Eigen::VectorXd& x, int t) {
  if (x.size() != net.dim()) {
    throw ShapeError("predict_noise: point dimension " + std::to_string(x.size()) +
                     " does not match network dimension " + std::to_string(net.dim()));
  }
  Eigen::MatrixXd batch = x;
  return net.predict_batch(s, batch, t).col(0);
}

Eigen::VectorXd analytic_gaussian_noise(const Eigen::VectorXd& mu, double var,
                                        const NoiseSchedule& s,
                                        const Eigen::VectorXd& x, int t) {
  if (mu.size() != x.size()) {
    throw ShapeError("analytic_gaussian_noise: mean and point dimensions differ");
  }
  if (!(var > 0.0)) throw ParameterError("Gaussian variance must be positive");
  const double a = s.alpha_bar(t);
  return std::sqrt(1.0 - a) * (x - std::sqrt(a) * mu) / (a * var + 1.0 - a);
}

GaussianNoiseOracle::GaussianNoiseOracle(Eigen::VectorXd mu, double var)
    : mu_(std::move(mu)), var_(var) {
  if (!(var_ > 0.0)) throw ParameterError("Gaussian variance must be positive");
}

Eigen::MatrixXd GaussianNoiseOracle::predict_batch(const NoiseSchedule& s,
                                                   const Eigen::MatrixXd& x,
                                                   int t) const {
  if (x.rows() != mu_.size()) {
    throw ShapeError("oracle dimension mismatch");
  }
  const double a = s.alpha_bar(t);
  const double scale = std::sqrt(1.0 - a) / (a * var_ + 1.0 - a);
  return scale * (x.colwise() - std::sqrt(a) * mu_);
}

NoiseDraw draw_noise(const NoiseSchedule& s, int dim, Eigen::Index batch,
                     std::mt19937_64& rng) {
  NoiseDraw draw;
  std::uniform_int_distribution<int> step(0, s.steps() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  draw.steps.resize(static_cast<std::size_t>(batch));
  draw.eps.resize(dim, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    draw.steps[static_cast<std::size_t>(j)] = step(rng);
    for (int k = 0; k < dim; ++k) draw.eps(k, j) = normal(rng);
  }
  return draw;
}

namespace {

Eigen::MatrixXd perturb_batch(const NoiseSchedule& s, const Eigen::MatrixXd& x0,
                              const NoiseDraw& draw) {
  if (draw.eps.rows() != x0.rows() || draw.eps.cols() != x0.cols() ||
      draw.steps.size() != static_cast<std::size_t>(x0.cols())) {
    throw ShapeError("noise draw does not match the batch shape");
  }
  Eigen::MatrixXd xt(x0.rows(), x0.cols());
  for (Eigen::Index j = 0; j < x0.cols(); ++j) {
    const double a = s.alpha_bar(draw.steps[static_cast<std::size_t>(j)]);
    xt.col(j) = std::sqrt(a) * x0.col(j) + std::sqrt(1.0 - a) * draw.eps.col(j);
  }
  return xt;
}

}  // namespace

double denoising_loss(const ScoreNetwork& net, const NoiseSchedule& s,
                      const Eigen::MatrixXd& batch, const NoiseDraw& draw) {
  if (batch.cols() == 0) throw ParameterError("denoising loss needs a non-empty batch");
  const Eigen::MatrixXd xt = perturb_batch(s, batch, draw);
  const Eigen::MatrixXd residual = net.forward(s, xt, draw.steps) - draw.eps;
  return residual.squaredNorm() / (static_cast<double>(batch.cols()) * batch.rows());
}

LossAndGrad denoising_loss_and_grad(const ScoreNetwork& net,
                                    const NoiseSchedule& s,
                                    const Eigen::MatrixXd& batch,
                                    const NoiseDraw& draw) {
  if (batch.cols() == 0) throw ParameterError("denoising loss needs a non-empty batch");
  const Eigen::MatrixXd xt = perturb_batch(s, batch, draw);
  ScoreNetwork::Cache cache;
  const Eigen::MatrixXd residual = net.forward(s, xt, draw.steps, &cache) - draw.eps;
  const double norm = static_cast<double>(batch.cols()) * batch.rows();
  LossAndGrad out;
  out.loss = residual.squaredNorm() / norm;
  out.grad.assign(net.weights().size(), 0.0);
  net.backward(cache, (2.0 / norm) * residual, out.grad);
  return out;
}

LossAndGrad denoising_loss_and_grad(const ScoreNetwork& net,
                                    const NoiseSchedule& s,
                                    const PointCloud& batch,
                                    std::mt19937_64& rng) {
  if (batch.size() == 0) throw ParameterError("denoising loss needs a non-empty batch");
  if (batch.dim() != net.dim()) {
    throw ShapeError("batch dimension does not match the network");
  }
  const NoiseDraw draw = draw_noise(s, batch.dim(), batch.points.cols(), rng);
  return denoising_loss_and_grad(net, s, batch.points, draw);
}

void TrainConfig::validate() const {
  if (batch_size <= 0) throw ParameterError("batch_size must be positive");
  if (iterations < 0) throw ParameterError("iterations must be non-negative");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ParameterError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ParameterError("adam_eps must be positive");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) {
    throw ParameterError("ema_decay must lie in [0, 1)");
  }
}

ScoreNetwork train(const ScoreNetwork& initial, const NoiseSchedule& s,
                   const PointCloud& data, const TrainConfig& cfg,
                   const TrainObserver& observer) {
  cfg.validate();
  if (data.size() == 0) throw ParameterError("training data is empty");
  if (data.dim() != initial.dim()) {
    throw ShapeError("training data dimension does not match the network");
  }
  ScoreNetwork net = initial;
  std::vector<double> ema = initial.weights();
  const std::size_t n_weights = ema.size();
  std::vector<double> m(n_weights, 0.0);
  std::vector<double> v(n_weights, 0.0);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  Eigen::MatrixXd batch(data.dim(), cfg.batch_size);
  double b1_pow = 1.0;
  double b2_pow = 1.0;

  for (long it = 1; it <= cfg.iterations; ++it) {
    for (int j = 0; j < cfg.batch_size; ++j) {
      batch.col(j) = data.points.col(static_cast<Eigen::Index>(pick(rng)));
    }
    const NoiseDraw draw = draw_noise(s, data.dim(), cfg.batch_size, rng);
    const LossAndGrad lg = denoising_loss_and_grad(net, s, batch, draw);
    if (!std::isfinite(lg.loss)) {
      throw TrainingError("training diverged: non-finite loss at iteration " +
                              std::to_string(it),
                          it);
    }
    b1_pow *= cfg.adam_beta1;
    b2_pow *= cfg.adam_beta2;
    const double step = cfg.learning_rate * std::sqrt(1.0 - b2_pow) / (1.0 - b1_pow);
    auto& w = net.mutable_weights();
    for (std::size_t i = 0; i < n_weights; ++i) {
      const double g = lg.grad[i];
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
      w[i] -= step * m[i] / (std::sqrt(v[i]) + cfg.adam_eps);
      ema[i] = cfg.ema_decay * ema[i] + (1.0 - cfg.ema_decay) * w[i];
    }
    if (observer) observer(it, lg.loss);
  }
  net.set_weights(std::move(ema));
  return net;
}

}  // namespace ddib
