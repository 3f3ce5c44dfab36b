#include "ordino/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace ordino {

namespace {

double loss_value(TaskLoss loss, int predicted, int actual) {
  switch (loss) {
    case TaskLoss::ZeroOne:
      return predicted == actual ? 0.0 : 1.0;
    case TaskLoss::Absolute:
      return std::abs(predicted - actual);
    case TaskLoss::Squared: {
      const double d = predicted - actual;
      return d * d;
    }
  }
  return 0.0;
}

}  // namespace

int bayes_label(const Eigen::Ref<const Eigen::VectorXd>& p, TaskLoss loss) {
  const int k = static_cast<int>(p.size());
  int best = 1;
  double best_risk = 0;
  for (int cand = 1; cand <= k; ++cand) {
    double risk = 0;
    for (int y = 1; y <= k; ++y) risk += p[y - 1] * loss_value(loss, cand, y);
    if (cand == 1 || risk < best_risk) {
      best = cand;
      best_risk = risk;
    }
  }
  return best;
}

int bayes_label(const Pmf& p, TaskLoss loss) {
  return bayes_label(p.values(), loss);
}

MetricsReport evaluate(const Model& model,
                       const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const std::vector<int>& labels,
                       const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("evaluate: empty split");
  MetricsReport report;
  report.n_test = static_cast<int>(rows.size());
  for (int r : rows) {
    const Eigen::VectorXd p = model.predict_pmf(features.row(r).transpose());
    const Eigen::VectorXd safe = clamp_renormalize(p);
    const int y = labels[static_cast<std::size_t>(r)];
    report.nll += -std::log(safe[y - 1]);
    report.mze += loss_value(TaskLoss::ZeroOne, bayes_label(p, TaskLoss::ZeroOne), y);
    report.mae += loss_value(TaskLoss::Absolute, bayes_label(p, TaskLoss::Absolute), y);
    report.mse += loss_value(TaskLoss::Squared, bayes_label(p, TaskLoss::Squared), y);
  }
  const double n = report.n_test;
  report.nll /= n;
  report.mze /= n;
  report.mae /= n;
  report.mse /= n;
  return report;
}

}  // namespace ordino
