#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "ordino/data.hpp"
#include "ordino/inference.hpp"
#include "ordino/model.hpp"

namespace ordino {

enum class Metric { Nll, Mze, Mae, Mse };

/// Mixture rates 0, 0.05, ..., 0.95, 1.
std::vector<double> default_r_grid();

/// Regularization strengths 10^-4, 10^-3.5, ..., 10^4.
std::vector<double> default_lambda_grid();

/// Ascending schedule 10^(2t/300 - 4) for the 0-based epoch index t.
double lr_at(int epoch_index);

struct TrainConfig {
  int epochs = 300;
  int batch_size = 16;
  Metric validation_metric = Metric::Nll;
  std::uint64_t seed = 0;
  std::vector<double> r_grid = default_r_grid();  // swept for the Maul link
  std::vector<double> lambda_grid;  // empty: plain likelihood objective
  double delta = 0.05;              // hinge margin of the unimodality penalty
  std::vector<int> hidden_sizes = {100, 100, 100};
  int threads = 1;

  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  GradientBuffer first_moment;
  GradientBuffer second_moment;
  long step = 0;

  static AdamState like(const Model& model);
};

/// One bias-corrected Adam update of the network and any PO thresholds.
void adam_step(Model& model, const GradientBuffer& grads, AdamState& state,
               double lr, const AdamConfig& adam = {});

/// Mean negative log likelihood over the given rows, probabilities floored
/// before the logarithm.
double nll(const Model& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
           const std::vector<int>& labels, const std::vector<int>& rows);

/// Mean hinge penalty on likelihood shapes that fail to rise until the
/// observed label and fall after it, with margin `delta`.
double uprl_regularizer(const Eigen::Ref<const Eigen::MatrixXd>& probs,
                        const std::vector<int>& labels, double delta);

/// Gradient of one sample's hinge penalty with respect to its pmf.
Eigen::VectorXd uprl_grad_single(const Eigen::Ref<const Eigen::VectorXd>& p,
                                 int label, double delta);

struct SelectedPoint {
  double r = 0;
  double lambda = 0;
  int epoch = 0;  // 1-based epoch of the adopted snapshot
  int grid_index = 0;
  double validation_value = 0;
};

struct TrialReport {
  int trial = 0;
  std::uint64_t seed = 0;
  Metric validation_metric = Metric::Nll;
  SelectedPoint selected;
  MetricsReport test;
  double ud_ur = 0;    // unimodality diagnostics of the test-set pmfs
  double ud_mhd = 0;
  int ud_n = 0;
  double train_nll_first = 0;  // train loss after the first epoch
  double train_nll_last = 0;   // and after the final epoch (selected grid point)
};

struct FitOutcome {
  Model model;
  Standardizer standardizer;
  TrialReport report;
};

/// Trains one model per grid point (mixture rates when the link is Maul,
/// regularization strengths when lambda_grid is non-empty), evaluates the
/// validation metric after every epoch, and adopts the grid point and epoch
/// with the smallest validation error (earliest on ties). Test metrics and
/// unimodality diagnostics are computed once for that snapshot.
FitOutcome fit(const Dataset& data, const SplitIndices& split,
               const LikelihoodSpec& spec, const TrainConfig& config);

}  // namespace ordino
