#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "ordino/links.hpp"
#include "ordino/mlp.hpp"

namespace ordino {

/// A likelihood model: the link spec, the learner network, and (for PO
/// models) the standalone threshold vector learned alongside the network.
struct Model {
  LikelihoodSpec spec;
  MlpParams net;
  Eigen::VectorXd po_bias;

  /// Packs the network output and any standalone thresholds into the link
  /// input layout expected by link_prob / link_vjp.
  Eigen::VectorXd pack_link_inputs(const Eigen::Ref<const Eigen::VectorXd>& net_out) const;

  Eigen::VectorXd predict_pmf(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// One pmf per requested row (all rows when `rows` is null).
  Eigen::MatrixXd predict_matrix(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                 const std::vector<int>* rows = nullptr) const;
};

Model make_model(const LikelihoodSpec& spec, int feature_dim,
                 const std::vector<int>& hidden_sizes, std::uint64_t seed);

}  // namespace ordino
