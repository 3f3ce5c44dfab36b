#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace ordino {

/// Fully connected network: ReLU on hidden layers, identity on the output.
/// weights[l] has shape (fan_out x fan_in); rows of data matrices are samples.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::vector<int> layer_sizes() const;
};

/// Fan-based uniform weights, zero biases, reproducible from the seed.
MlpParams mlp_init(std::uint64_t seed, const std::vector<int>& sizes);

struct MlpCache {
  std::vector<Eigen::MatrixXd> activations;  // [0] = input batch, post-ReLU after
};

Eigen::MatrixXd mlp_forward(const MlpParams& params,
                            const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                            MlpCache* cache = nullptr);
Eigen::VectorXd mlp_forward_one(const MlpParams& params,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

/// Per-parameter accumulators matching MlpParams (plus the standalone
/// threshold vector of PO models). Zero it between mini-batches.
struct GradientBuffer {
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
  Eigen::VectorXd po_bias_grad;

  static GradientBuffer like(const MlpParams& params, int po_bias_dim);
  void set_zero();
};

/// Reverse-mode gradients for a batch, accumulated into `grads`. The ReLU
/// subgradient at zero is taken as zero.
void mlp_backward(const MlpParams& params, const MlpCache& cache,
                  const Eigen::Ref<const Eigen::MatrixXd>& upstream,
                  GradientBuffer& grads);

GradientBuffer mlp_backward_one(const MlpParams& params,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& upstream);

}  // namespace ordino
