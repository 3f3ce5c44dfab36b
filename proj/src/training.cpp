#include "ordino/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "ordino/analysis.hpp"
#include "ordino/parallel.hpp"
#include "ordino/rng.hpp"

namespace ordino {

namespace {

constexpr std::uint64_t kInitStream = 0x100000000ull;
constexpr std::uint64_t kShuffleStream = 0x200000000ull;

double eval_metric(const Model& model,
                   const Eigen::Ref<const Eigen::MatrixXd>& features,
                   const std::vector<int>& labels, const std::vector<int>& rows,
                   Metric metric) {
  if (metric == Metric::Nll) return nll(model, features, labels, rows);
  const MetricsReport report = evaluate(model, features, labels, rows);
  switch (metric) {
    case Metric::Mze:
      return report.mze;
    case Metric::Mae:
      return report.mae;
    case Metric::Mse:
      return report.mse;
    default:
      return report.nll;
  }
}

struct GridJob {
  LikelihoodSpec spec;
  double lambda = 0;
};

struct JobResult {
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;  // 1-based
  Model best_model;
  double train_nll_first = 0;
  double train_nll_last = 0;
};

JobResult train_one_job(const Eigen::Ref<const Eigen::MatrixXd>& features,
                        const std::vector<int>& labels,
                        const SplitIndices& split, const GridJob& job,
                        const TrainConfig& config, int job_index) {
  const LikelihoodSpec& spec = job.spec;
  const int k = spec.num_classes;
  const int po_dim = spec.po_bias_dim();
  Model model = make_model(spec, static_cast<int>(features.cols()),
                           config.hidden_sizes,
                           substream(config.seed, kInitStream + job_index));
  AdamState adam = AdamState::like(model);
  GradientBuffer grads = GradientBuffer::like(model.net, po_dim);

  JobResult result;
  std::vector<int> order;
  MlpCache cache;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch);
    // mini-batch order depends on (seed, epoch) only, so every grid point
    // sees the same data stream
    order = split.train;
    std::mt19937_64 shuffle_rng(
        substream(config.seed, kShuffleStream + static_cast<std::uint64_t>(epoch)));
    shuffle_in_place(order, shuffle_rng);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const int batch = static_cast<int>(
          std::min(order.size() - start, static_cast<std::size_t>(config.batch_size)));
      Eigen::MatrixXd inputs(batch, features.cols());
      for (int i = 0; i < batch; ++i)
        inputs.row(i) = features.row(order[start + static_cast<std::size_t>(i)]);
      const Eigen::MatrixXd net_out = mlp_forward(model.net, inputs, &cache);
      if (!net_out.allFinite()) continue;  // diverged state: skip the update

      grads.set_zero();
      Eigen::MatrixXd upstream =
          Eigen::MatrixXd::Zero(batch, spec.learner_output_dim());
      for (int i = 0; i < batch; ++i) {
        const int y = labels[static_cast<std::size_t>(
            order[start + static_cast<std::size_t>(i)])];
        const Eigen::VectorXd link_in =
            model.pack_link_inputs(net_out.row(i).transpose());
        const Eigen::VectorXd p_raw = link_prob(spec, link_in);
        const Eigen::VectorXd p_safe = clamp_renormalize(p_raw);
        Eigen::VectorXd dprob_safe = Eigen::VectorXd::Zero(k);
        dprob_safe[y - 1] = -1.0 / (batch * p_safe[y - 1]);
        Eigen::VectorXd dprob_raw = clamp_renormalize_vjp(p_raw, dprob_safe);
        if (job.lambda > 0)
          dprob_raw += (job.lambda / batch) * uprl_grad_single(p_raw, y, config.delta);
        const Eigen::VectorXd d_inputs = link_vjp(spec, link_in, dprob_raw);
        if (po_dim > 0) {
          upstream(i, 0) = d_inputs[0];
          grads.po_bias_grad += d_inputs.tail(po_dim);
        } else {
          upstream.row(i) = d_inputs.transpose();
        }
      }
      mlp_backward(model.net, cache, upstream, grads);
      adam_step(model, grads, adam, lr);
    }

    // a diverged model scores +inf and is never adopted
    double val = std::numeric_limits<double>::infinity();
    double train_nll = std::numeric_limits<double>::infinity();
    try {
      val = eval_metric(model, features, labels, split.val,
                        config.validation_metric);
      if (epoch == 0 || epoch + 1 == config.epochs)
        train_nll = nll(model, features, labels, split.train);
    } catch (const std::invalid_argument&) {
    }
    if (!std::isfinite(val)) val = std::numeric_limits<double>::infinity();
    if (epoch == 0) result.train_nll_first = train_nll;
    if (epoch + 1 == config.epochs) result.train_nll_last = train_nll;
    if (val < result.best_val) {
      result.best_val = val;
      result.best_epoch = epoch + 1;
      result.best_model = model;
    }
  }
  if (result.best_epoch == 0)
    throw std::runtime_error("fit: no epoch produced a finite validation value");
  return result;
}

}  // namespace

std::vector<double> default_r_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  return grid;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int j = 0; j <= 16; ++j) grid.push_back(std::pow(10.0, -4.0 + 0.5 * j));
  return grid;
}

double lr_at(int epoch_index) {
  if (epoch_index < 0 || epoch_index > 300)
    throw std::invalid_argument("lr_at: epoch index outside [0, 300]");
  return std::pow(10.0, 2.0 * epoch_index / 300.0 - 4.0);
}

void TrainConfig::validate() const {
  if (epochs < 1 || epochs > 300)
    throw std::invalid_argument("TrainConfig: epochs must lie in [1, 300]");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (delta < 0) throw std::invalid_argument("TrainConfig: delta must be >= 0");
  if (r_grid.empty()) throw std::invalid_argument("TrainConfig: empty r grid");
  for (double r : r_grid)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("TrainConfig: r grid entry outside [0, 1]");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw std::invalid_argument("TrainConfig: negative lambda");
  for (int h : hidden_sizes)
    if (h < 1) throw std::invalid_argument("TrainConfig: hidden size must be >= 1");
}

AdamState AdamState::like(const Model& model) {
  AdamState state;
  state.first_moment = GradientBuffer::like(model.net, model.spec.po_bias_dim());
  state.second_moment = GradientBuffer::like(model.net, model.spec.po_bias_dim());
  return state;
}

namespace {

template <class Tensor>
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                 double lr, double bias1, double bias2, const AdamConfig& adam) {
  m = adam.beta1 * m + (1.0 - adam.beta1) * grad;
  v = adam.beta2 * v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
  param.array() -=
      lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + adam.epsilon);
}

}  // namespace

void adam_step(Model& model, const GradientBuffer& grads, AdamState& state,
               double lr, const AdamConfig& adam) {
  state.step += 1;
  const double bias1 = 1.0 - std::pow(adam.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(adam.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < model.net.weights.size(); ++l) {
    adam_update(model.net.weights[l], grads.weight_grads[l],
                state.first_moment.weight_grads[l],
                state.second_moment.weight_grads[l], lr, bias1, bias2, adam);
    adam_update(model.net.biases[l], grads.bias_grads[l],
                state.first_moment.bias_grads[l],
                state.second_moment.bias_grads[l], lr, bias1, bias2, adam);
  }
  if (model.po_bias.size() > 0)
    adam_update(model.po_bias, grads.po_bias_grad, state.first_moment.po_bias_grad,
                state.second_moment.po_bias_grad, lr, bias1, bias2, adam);
}

double nll(const Model& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
           const std::vector<int>& labels, const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("nll: empty split");
  double total = 0;
  for (int r : rows) {
    const Eigen::VectorXd p =
        clamp_renormalize(model.predict_pmf(features.row(r).transpose()));
    total += -std::log(p[labels[static_cast<std::size_t>(r)] - 1]);
  }
  return total / static_cast<double>(rows.size());
}

double uprl_regularizer(const Eigen::Ref<const Eigen::MatrixXd>& probs,
                        const std::vector<int>& labels, double delta) {
  if (delta < 0) throw std::invalid_argument("uprl_regularizer: delta must be >= 0");
  if (probs.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("uprl_regularizer: rows and labels disagree");
  const Eigen::Index k = probs.cols();
  double total = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j + 1 < k; ++j) {
      if (j + 1 < y)  // below the label the pmf should rise
        total += std::max(0.0, delta + probs(i, j) - probs(i, j + 1));
      else  // at and above it the pmf should fall
        total += std::max(0.0, delta + probs(i, j + 1) - probs(i, j));
    }
  }
  return total / static_cast<double>(probs.rows());
}

Eigen::VectorXd uprl_grad_single(const Eigen::Ref<const Eigen::VectorXd>& p,
                                 int label, double delta) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.size());
  for (Eigen::Index j = 0; j + 1 < p.size(); ++j) {
    if (j + 1 < label) {
      if (delta + p[j] - p[j + 1] > 0) {
        grad[j] += 1;
        grad[j + 1] -= 1;
      }
    } else {
      if (delta + p[j + 1] - p[j] > 0) {
        grad[j + 1] += 1;
        grad[j] -= 1;
      }
    }
  }
  return grad;
}

FitOutcome fit(const Dataset& data, const SplitIndices& split,
               const LikelihoodSpec& spec, const TrainConfig& config) {
  spec.validate();
  config.validate();
  if (split.train.empty() || split.val.empty() || split.test.empty())
    throw std::invalid_argument("fit: train, validation, and test must be nonempty");
  if (spec.num_classes != data.num_classes)
    throw std::invalid_argument("fit: spec and dataset disagree on the class count");
  for (int y : data.labels)
    if (y < 1 || y > data.num_classes)
      throw std::invalid_argument("fit: label outside 1..K");

  const Standardizer standardizer = Standardizer::fit(data.features, split.train);
  const Eigen::MatrixXd features = standardizer.apply(data.features);

  std::vector<GridJob> jobs;
  const std::vector<double> rates =
      spec.link == LinkKind::Maul ? config.r_grid
                                  : std::vector<double>{spec.mixture_rate};
  const std::vector<double> lambdas =
      config.lambda_grid.empty() ? std::vector<double>{0.0} : config.lambda_grid;
  for (double r : rates) {
    LikelihoodSpec grid_spec = spec;
    grid_spec.mixture_rate = r;
    for (double lambda : lambdas) jobs.push_back({grid_spec, lambda});
  }

  std::vector<JobResult> results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), config.threads, [&](int j) {
    results[static_cast<std::size_t>(j)] =
        train_one_job(features, data.labels, split, jobs[static_cast<std::size_t>(j)],
                      config, j);
  });

  int best = 0;
  for (int j = 1; j < static_cast<int>(results.size()); ++j)
    if (results[static_cast<std::size_t>(j)].best_val <
        results[static_cast<std::size_t>(best)].best_val)
      best = j;  // exact ties keep the earlier grid point
  const JobResult& winner = results[static_cast<std::size_t>(best)];

  FitOutcome outcome;
  outcome.model = winner.best_model;
  outcome.standardizer = standardizer;
  outcome.report.seed = config.seed;
  outcome.report.validation_metric = config.validation_metric;
  outcome.report.selected = {jobs[static_cast<std::size_t>(best)].spec.mixture_rate,
                             jobs[static_cast<std::size_t>(best)].lambda,
                             winner.best_epoch, best, winner.best_val};
  outcome.report.test = evaluate(outcome.model, features, data.labels, split.test);
  const UnimodalityProfile ud =
      profile(outcome.model.predict_matrix(features, &split.test), config.threads);
  outcome.report.ud_ur = ud.ur;
  outcome.report.ud_mhd = ud.mhd;
  outcome.report.ud_n = ud.n;
  outcome.report.train_nll_first = winner.train_nll_first;
  outcome.report.train_nll_last = winner.train_nll_last;
  return outcome;
}

}  // namespace ordino
