#include "ordino/model.hpp"

#include <stdexcept>

namespace ordino {

Eigen::VectorXd Model::pack_link_inputs(
    const Eigen::Ref<const Eigen::VectorXd>& net_out) const {
  const int po_dim = spec.po_bias_dim();
  if (po_dim == 0) return net_out;
  Eigen::VectorXd in(1 + po_dim);
  in[0] = net_out[0];
  in.tail(po_dim) = po_bias;
  return in;
}

Eigen::VectorXd Model::predict_pmf(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return link_prob(spec, pack_link_inputs(mlp_forward_one(net, x)));
}

Eigen::MatrixXd Model::predict_matrix(
    const Eigen::Ref<const Eigen::MatrixXd>& features,
    const std::vector<int>* rows) const {
  const Eigen::Index n = rows ? static_cast<Eigen::Index>(rows->size())
                              : features.rows();
  Eigen::MatrixXd probs(n, spec.num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = rows ? (*rows)[static_cast<std::size_t>(i)] : i;
    probs.row(i) = predict_pmf(features.row(r).transpose()).transpose();
  }
  return probs;
}

Model make_model(const LikelihoodSpec& spec, int feature_dim,
                 const std::vector<int>& hidden_sizes, std::uint64_t seed) {
  spec.validate();
  if (feature_dim < 1)
    throw std::invalid_argument("make_model: feature_dim must be >= 1");
  std::vector<int> sizes;
  sizes.push_back(feature_dim);
  for (int h : hidden_sizes) sizes.push_back(h);
  sizes.push_back(spec.learner_output_dim());
  Model model;
  model.spec = spec;
  model.net = mlp_init(seed, sizes);
  model.po_bias = Eigen::VectorXd::Zero(spec.po_bias_dim());
  return model;
}

}  // namespace ordino
