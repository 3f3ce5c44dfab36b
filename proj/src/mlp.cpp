#include "ordino/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "ordino/rng.hpp"

namespace ordino {

std::vector<int> MlpParams::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim());
  for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

MlpParams mlp_init(std::uint64_t seed, const std::vector<int>& sizes) {
  if (sizes.size() < 2)
    throw std::invalid_argument("mlp_init: need at least input and output sizes");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("mlp_init: layer size must be >= 1");
  std::mt19937_64 rng(seed);
  MlpParams params;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = uniform_in(rng, -bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return params;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params,
                            const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                            MlpCache* cache) {
  if (inputs.cols() != params.input_dim())
    throw std::invalid_argument("mlp_forward: expected " +
                                std::to_string(params.input_dim()) +
                                " features, got " + std::to_string(inputs.cols()));
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(inputs);
  }
  Eigen::MatrixXd act = inputs;
  const std::size_t layers = params.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = act * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    if (l + 1 < layers) z = z.array().max(0.0);
    act = std::move(z);
    if (cache && l + 1 < layers) cache->activations.push_back(act);
  }
  return act;
}

Eigen::VectorXd mlp_forward_one(const MlpParams& params,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
  return mlp_forward(params, x.transpose()).row(0).transpose();
}

GradientBuffer GradientBuffer::like(const MlpParams& params, int po_bias_dim) {
  GradientBuffer g;
  for (const auto& w : params.weights)
    g.weight_grads.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases)
    g.bias_grads.push_back(Eigen::VectorXd::Zero(b.size()));
  g.po_bias_grad = Eigen::VectorXd::Zero(po_bias_dim);
  return g;
}

void GradientBuffer::set_zero() {
  for (auto& w : weight_grads) w.setZero();
  for (auto& b : bias_grads) b.setZero();
  po_bias_grad.setZero();
}

void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const Eigen::Ref<const Eigen::MatrixXd>& upstream,
                  GradientBuffer& grads) {
  const std::size_t layers = params.weights.size();
  if (cache.activations.size() != layers)
    throw std::invalid_argument("mlp_backward: cache does not match network");
  if (upstream.cols() != params.output_dim())
    throw std::invalid_argument("mlp_backward: upstream width mismatch");
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = layers; l-- > 0;) {
    grads.weight_grads[l].noalias() += delta.transpose() * cache.activations[l];
    grads.bias_grads[l] += delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * params.weights[l];
      delta = (cache.activations[l].array() > 0.0).select(back, 0.0);
    }
  }
}

GradientBuffer mlp_backward_one(const MlpParams& params,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& upstream) {
  MlpCache cache;
  mlp_forward(params, x.transpose(), &cache);
  GradientBuffer grads = GradientBuffer::like(params, 0);
  mlp_backward(params, cache, upstream.transpose(), grads);
  return grads;
}

}  // namespace ordino
