#pragma once

#include <Eigen/Core>

#include <vector>

#include "ordino/model.hpp"
#include "ordino/pmf.hpp"

namespace ordino {

enum class TaskLoss { ZeroOne, Absolute, Squared };

struct MetricsReport {
  double nll = 0;
  double mze = 0;
  double mae = 0;
  double mse = 0;
  int n_test = 0;
};

/// Label (1-based) minimizing the expected task loss under `p`; ties go to
/// the smallest label.
int bayes_label(const Eigen::Ref<const Eigen::VectorXd>& p, TaskLoss loss);
int bayes_label(const Pmf& p, TaskLoss loss);

/// Empirical risks over the given rows: NLL of the floored likelihood plus
/// the zero-one/absolute/squared errors, each with its own optimal labeling.
MetricsReport evaluate(const Model& model,
                       const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const std::vector<int>& labels,
                       const std::vector<int>& rows);

}  // namespace ordino
