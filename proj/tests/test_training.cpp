#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ordino/rng.hpp"
#include "ordino/simplex.hpp"
#include "ordino/training.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace ordino;

namespace {

LikelihoodSpec make_spec(LinkKind link, int k, double r = 0.0) {
  LikelihoodSpec spec;
  spec.link = link;
  spec.num_classes = k;
  spec.mixture_rate = r;
  return spec;
}

// Constant predictor: zero weights, biases chosen so the link emits `p`.
Model constant_sl_model(const VectorXd& p, int dim) {
  LikelihoodSpec spec = make_spec(LinkKind::Sl, static_cast<int>(p.size()));
  Model model = make_model(spec, dim, {}, 0);
  model.net.weights[0].setZero();
  model.net.biases[0] = (-p.array().log()).matrix();
  return model;
}

TrainConfig small_config(std::uint64_t seed, int epochs = 60) {
  TrainConfig config;
  config.epochs = epochs;
  config.seed = seed;
  config.hidden_sizes = {16, 16};
  config.r_grid = {0.3};
  return config;
}

bool models_equal(const Model& a, const Model& b) {
  if (a.po_bias != b.po_bias) return false;
  for (std::size_t l = 0; l < a.net.weights.size(); ++l)
    if (a.net.weights[l] != b.net.weights[l] || a.net.biases[l] != b.net.biases[l])
      return false;
  return true;
}

}  // namespace

TEST_CASE("learning-rate schedule endpoints") {
  CHECK(lr_at(0) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(lr_at(150) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(lr_at(300) == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK_THROWS_AS(lr_at(-1), std::invalid_argument);
  CHECK_THROWS_AS(lr_at(301), std::invalid_argument);
}

TEST_CASE("default search grids") {
  const std::vector<double> rs = default_r_grid();
  CHECK(rs.size() == 21);
  CHECK(rs.front() == 0.0);
  CHECK(rs.back() == 1.0);
  CHECK(rs[1] == 0.05);
  const std::vector<double> lambdas = default_lambda_grid();
  CHECK(lambdas.size() == 17);
  CHECK(lambdas.front() == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(lambdas.back() == doctest::Approx(1e4).epsilon(1e-12));
}

TEST_CASE("mean negative log likelihood on constant predictors") {
  MatrixXd features = MatrixXd::Zero(2, 1);
  std::vector<int> rows{0, 1};

  VectorXd sharp(3);
  sharp << 1.0 - 2e-13, 1e-13, 1e-13;
  Model near_perfect = constant_sl_model(sharp, 1);
  CHECK(nll(near_perfect, features, {1, 1}, rows) < 1e-9);

  Model uniform = constant_sl_model(VectorXd::Constant(4, 0.25), 1);
  CHECK(nll(uniform, features, {3, 2}, rows) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));

  VectorXd skew(3);
  skew << .5, .25, .25;
  Model skewed = constant_sl_model(skew, 1);
  CHECK(nll(skewed, features, {1, 2}, rows) ==
        doctest::Approx(-(std::log(.5) + std::log(.25)) / 2).epsilon(1e-12));
  CHECK_THROWS_AS(nll(skewed, features, {1, 2}, {}), std::invalid_argument);
}

TEST_CASE("unimodality penalty values") {
  MatrixXd probs(1, 3);
  probs.row(0) << .2, .5, .3;
  CHECK(uprl_regularizer(probs, {2}, 0.05) == 0.0);
  probs.row(0) << .5, .2, .3;
  CHECK(uprl_regularizer(probs, {2}, 0.05) == doctest::Approx(0.5).epsilon(1e-12));
  probs.row(0) << .1, .6, .3;
  CHECK(uprl_regularizer(probs, {2}, 0.0) == 0.0);

  MatrixXd batch(2, 3);
  batch.row(0) << .5, .2, .3;
  batch.row(1) << .2, .5, .3;
  CHECK(uprl_regularizer(batch, {2, 2}, 0.05) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(uprl_regularizer(batch, {2}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(uprl_regularizer(batch, {2, 2}, -0.1), std::invalid_argument);
}

TEST_CASE("penalty gradient matches finite differences through the link") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + static_cast<int>(rng() % 5);
    const LikelihoodSpec spec = make_spec(LinkKind::Sl, k);
    VectorXd in(k);
    for (int i = 0; i < k; ++i) in[i] = uniform_in(rng, -1.5, 1.5);
    const int label = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    const double delta = 0.05;

    const VectorXd analytic =
        link_vjp(spec, in, uprl_grad_single(link_prob(spec, in), label, delta));
    const VectorXd numeric = oracle::central_diff(
        [&](const VectorXd& x) {
          MatrixXd row(1, k);
          row.row(0) = link_prob(spec, x).transpose();
          return uprl_regularizer(row, {label}, delta);
        },
        in, 1e-6);
    CHECK(oracle::relative_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("adam update behavior") {
  LikelihoodSpec spec = make_spec(LinkKind::Sl, 3);
  Model model = make_model(spec, 2, {4}, 5);
  const Model before = model;
  AdamState state = AdamState::like(model);
  GradientBuffer grads = GradientBuffer::like(model.net, 0);

  adam_step(model, grads, state, 0.1);
  CHECK(models_equal(model, before));  // zero gradient moves nothing

  grads.weight_grads[0](0, 0) = 3.0;
  grads.weight_grads[0](1, 1) = -0.7;
  AdamState fresh = AdamState::like(model);
  adam_step(model, grads, fresh, 0.1);
  // bias-corrected first step has magnitude ~lr per coordinate
  CHECK(before.net.weights[0](0, 0) - model.net.weights[0](0, 0) ==
        doctest::Approx(0.1).epsilon(1e-6));
  CHECK(model.net.weights[0](1, 1) - before.net.weights[0](1, 1) ==
        doctest::Approx(0.1).epsilon(1e-6));
  CHECK(model.net.weights[0](2, 0) == before.net.weights[0](2, 0));
}

TEST_CASE("fit learns a separable two-feature problem") {
  const synth::Cpd cpd = synth::make_cpd(3, 2, 8.0, 0.0, 11);
  const Dataset data = synth::sample_dataset("separable", cpd, 360, 21);
  const SplitIndices split = make_split(data, {200, 80, 4});
  TrainConfig config = small_config(17, 300);
  config.validation_metric = Metric::Mze;
  config.hidden_sizes = {32, 32};
  const FitOutcome out = fit(data, split, make_spec(LinkKind::Sl, 3), config);
  CHECK(out.report.selected.validation_value < 0.1);
  CHECK(out.report.test.mze < 0.2);
  CHECK(out.report.selected.epoch >= 1);
  CHECK(out.report.selected.epoch <= 300);
}

TEST_CASE("zero regularization reproduces the plain fit bit-exactly") {
  const synth::Cpd cpd = synth::make_cpd(4, 3, 1.5, 0.1, 13);
  const Dataset data = synth::sample_dataset("zero-reg", cpd, 200, 31);
  const SplitIndices split = make_split(data, {60, 40, 9});
  TrainConfig plain = small_config(23, 40);
  TrainConfig zeroed = plain;
  zeroed.lambda_grid = {0.0};
  const FitOutcome a = fit(data, split, make_spec(LinkKind::Sl, 4), plain);
  const FitOutcome b = fit(data, split, make_spec(LinkKind::Sl, 4), zeroed);
  CHECK(models_equal(a.model, b.model));
  CHECK(a.report.test.nll == b.report.test.nll);
  CHECK(a.report.selected.epoch == b.report.selected.epoch);
}

TEST_CASE("a single zero mixture rate degenerates to the unimodal model") {
  const synth::Cpd cpd = synth::make_cpd(4, 2, 1.5, 0.1, 17);
  const Dataset data = synth::sample_dataset("degenerate", cpd, 200, 37);
  const SplitIndices split = make_split(data, {60, 40, 2});
  TrainConfig config = small_config(29, 40);
  config.r_grid = {0.0};
  const FitOutcome out = fit(data, split, make_spec(LinkKind::Maul, 4), config);
  CHECK(out.report.selected.r == 0.0);
  CHECK(out.report.ud_ur == 1.0);  // every prediction is unimodal
  CHECK(out.report.ud_mhd == 0.0);
}

TEST_CASE("training is a deterministic function of the config") {
  const synth::Cpd cpd = synth::make_cpd(3, 2, 1.5, 0.15, 19);
  const Dataset data = synth::sample_dataset("determinism", cpd, 180, 41);
  const SplitIndices split = make_split(data, {50, 40, 5});
  TrainConfig config = small_config(31, 25);
  config.r_grid = {0.0, 0.5, 1.0};
  const FitOutcome a = fit(data, split, make_spec(LinkKind::Maul, 3), config);
  const FitOutcome b = fit(data, split, make_spec(LinkKind::Maul, 3), config);
  CHECK(models_equal(a.model, b.model));
  CHECK(a.report.selected.r == b.report.selected.r);
  CHECK(a.report.selected.epoch == b.report.selected.epoch);
  CHECK(a.report.test.nll == b.report.test.nll);
  CHECK(a.report.test.mae == b.report.test.mae);
  CHECK(a.report.ud_mhd == b.report.ud_mhd);
}

TEST_CASE("the training objective trends down for every model family") {
  const synth::Cpd cpd = synth::make_cpd(4, 2, 1.5, 0.1, 23);
  const Dataset data = synth::sample_dataset("trend", cpd, 220, 47);
  const std::vector<LikelihoodSpec> specs{
      make_spec(LinkKind::Sl, 4),   make_spec(LinkKind::Vsl, 4),
      make_spec(LinkKind::Cl, 4),   make_spec(LinkKind::Pocl, 4),
      make_spec(LinkKind::Povsl, 4), make_spec(LinkKind::Maul, 4, 0.3)};
  for (const LikelihoodSpec& spec : specs) {
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SplitIndices split = make_split(data, {60, 40, seed});
      TrainConfig config = small_config(seed, 300);
      const FitOutcome out = fit(data, split, spec, config);
      improved += out.report.train_nll_last < out.report.train_nll_first ? 1 : 0;
    }
    CHECK(improved >= 3);  // median over five seeds
  }
}

TEST_CASE("fit validates its inputs") {
  const synth::Cpd cpd = synth::make_cpd(3, 2, 1.5, 0.1, 29);
  const Dataset data = synth::sample_dataset("invalid", cpd, 100, 53);
  SplitIndices split = make_split(data, {40, 30, 1});
  TrainConfig config = small_config(1, 10);

  SplitIndices empty_test = split;
  empty_test.test.clear();
  CHECK_THROWS_AS(fit(data, empty_test, make_spec(LinkKind::Sl, 3), config),
                  std::invalid_argument);

  CHECK_THROWS_AS(fit(data, split, make_spec(LinkKind::Sl, 5), config),
                  std::invalid_argument);

  TrainConfig bad = config;
  bad.epochs = 0;
  CHECK_THROWS_AS(fit(data, split, make_spec(LinkKind::Sl, 3), bad),
                  std::invalid_argument);
  bad = config;
  bad.r_grid = {1.5};
  CHECK_THROWS_AS(fit(data, split, make_spec(LinkKind::Maul, 3), bad),
                  std::invalid_argument);
}
