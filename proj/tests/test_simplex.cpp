#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>

#include <cmath>
#include <random>

#include "ordino/pmf.hpp"
#include "ordino/rng.hpp"
#include "ordino/simplex.hpp"
#include "support/oracles.hpp"

using Eigen::VectorXd;
using namespace ordino;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const VectorXd kRisingFalling =
    vec({0, 0, .05, .1, .15, .3, .2, .15, .05, 0});
const VectorXd kSwappedPair =
    vec({0, 0, .05, .15, .1, .3, .2, .15, .05, 0});
const VectorXd kScattered =
    vec({.15, 0, .2, 0, .1, .3, .05, 0, .05, .15});

}  // namespace

TEST_CASE("pmf construction enforces the simplex") {
  CHECK_THROWS_AS(Pmf(vec({.5, .5})), std::invalid_argument);
  CHECK_THROWS_AS(Pmf(vec({.5, .4, .2})), std::invalid_argument);
  CHECK_THROWS_AS(Pmf(vec({1.2, -.1, -.1})), std::invalid_argument);
  CHECK_NOTHROW(Pmf(vec({.2, .5, .3})));
}

TEST_CASE("unimodality test on known shapes") {
  CHECK(is_unimodal(kRisingFalling));
  CHECK_FALSE(is_unimodal(kSwappedPair));
  CHECK_FALSE(is_unimodal(kScattered));
  CHECK(is_unimodal(VectorXd::Constant(5, 0.2)));
  CHECK_THROWS_AS(is_unimodal(vec({.5, .5})), std::invalid_argument);
}

TEST_CASE("mode sets") {
  CHECK(mode_set(vec({.2, .5, .3})) == std::vector<int>{2});
  CHECK(mode_set(VectorXd::Constant(3, 1.0 / 3)) == std::vector<int>{1, 2, 3});
  CHECK(mode_set(vec({.4, .4, .2})) == std::vector<int>{1, 2});
}

TEST_CASE("simplex projection") {
  const VectorXd p = vec({.2, .5, .3});
  CHECK((project_to_simplex(p) - p).norm() < 1e-12);
  CHECK((project_to_simplex(vec({2., 0., 0.})) - vec({1., 0., 0.})).norm() < 1e-12);
  CHECK((project_to_simplex(vec({.5, .5, .5})) - VectorXd::Constant(3, 1.0 / 3)).norm() <
        1e-12);
  const VectorXd once = project_to_simplex(vec({.3, -.2, 1.4, .1}));
  CHECK((project_to_simplex(once) - once).norm() < 1e-12);
  VectorXd bad = vec({1., 0., 0.});
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(project_to_simplex(bad), std::invalid_argument);
}

TEST_CASE("fixed-peak projection on worked instances") {
  const VectorXd split = vec({.5, 0., .5});
  CHECK((project_unimodal_fixed_mode(split, 1).values() - vec({.5, .25, .25})).norm() <
        1e-8);
  CHECK((project_unimodal_fixed_mode(split, 2).values() -
         VectorXd::Constant(3, 1.0 / 3))
            .norm() < 1e-8);
  CHECK((project_unimodal_fixed_mode(kRisingFalling, 6).values() - kRisingFalling)
            .norm() < 1e-8);
  CHECK_THROWS_AS(project_unimodal_fixed_mode(split, 0), std::invalid_argument);
  CHECK_THROWS_AS(project_unimodal_fixed_mode(split, 4), std::invalid_argument);
}

TEST_CASE("fixed-peak projection reports non-convergence with its best iterate") {
  try {
    project_unimodal_fixed_mode(vec({.5, 0., .5}), 1, 1e-10, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_iterate.allFinite());
    CHECK(e.residual > 0);
  }
}

TEST_CASE("distance to the unimodal set on worked instances") {
  const UnimodalProjection same = hausdorff_to_unimodal(Pmf(kRisingFalling));
  CHECK(same.distance == 0.0);
  CHECK((same.nearest.values() - kRisingFalling).norm() == 0.0);

  const UnimodalProjection split = hausdorff_to_unimodal(Pmf(vec({.5, 0., .5})));
  CHECK(split.distance == doctest::Approx(0.3535533906).epsilon(1e-6));
  CHECK(split.mode == 1);  // reversal tie resolved to the smaller peak
  CHECK((split.nearest.values() - vec({.5, .25, .25})).norm() < 1e-7);

  const UnimodalProjection swapped = hausdorff_to_unimodal(Pmf(kSwappedPair));
  CHECK(swapped.distance == doctest::Approx(0.0353553391).epsilon(1e-4));
  VectorXd pooled = kSwappedPair;
  pooled[3] = pooled[4] = .125;
  CHECK((swapped.nearest.values() - pooled).norm() < 1e-6);
}

TEST_CASE("approximate unimodality thresholds") {
  CHECK(is_approx_unimodal(Pmf(kRisingFalling), 0.0));
  CHECK_FALSE(is_approx_unimodal(Pmf(vec({.5, 0., .5})), 0.3));
  CHECK_THROWS_AS(is_approx_unimodal(Pmf(kRisingFalling), -1.0), std::invalid_argument);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i)
    CHECK(is_approx_unimodal(Pmf(oracle::random_pmf(6, rng)), std::sqrt(2.0)));
}

TEST_CASE("projection is idempotent, symmetric under reversal, zero iff member") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 3 + static_cast<int>(rng() % 6);
    const VectorXd p = oracle::random_pmf(k, rng);
    const UnimodalProjection proj = hausdorff_to_unimodal(Pmf(p));

    CHECK(proj.distance <= std::sqrt(2.0) + 1e-12);
    CHECK(hausdorff_to_unimodal(proj.nearest).distance < 1e-8);

    const VectorXd reversed = p.reverse();
    CHECK(hausdorff_to_unimodal(Pmf(reversed)).distance ==
          doctest::Approx(proj.distance).epsilon(1e-8));

    CHECK((proj.distance < 1e-8) == is_unimodal(p, 1e-7));
  }
}

TEST_CASE("each projection step is non-expansive") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 4 + static_cast<int>(rng() % 5);
    VectorXd u(k), v(k);
    for (int i = 0; i < k; ++i) {
      u[i] = ordino::uniform_in(rng, -1.0, 1.0);
      v[i] = ordino::uniform_in(rng, -1.0, 1.0);
    }
    const double gap = (u - v).norm() + 1e-12;
    CHECK((project_to_simplex(u) - project_to_simplex(v)).norm() <= gap);
    const int mode = 1 + static_cast<int>(rng() % k);
    CHECK((project_nondecreasing_prefix(u, mode) - project_nondecreasing_prefix(v, mode))
              .norm() <= gap);
    CHECK((project_nonincreasing_suffix(u, mode) - project_nonincreasing_suffix(v, mode))
              .norm() <= gap);
  }
}

TEST_CASE("agreement with the exhaustive grid oracle for three classes") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd p = oracle::random_pmf(3, rng);
    const double impl = hausdorff_to_unimodal(Pmf(p)).distance;
    const double grid = oracle::grid_hausdorff_k3(p);
    CHECK(std::abs(impl - grid) <= 2e-3);
  }
}

TEST_CASE("agreement with the plateau-generator oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const int k = 4 + static_cast<int>(rng() % 5);
    const VectorXd p = oracle::random_pmf(k, rng);
    const UnimodalProjection impl = hausdorff_to_unimodal(Pmf(p));
    const oracle::Projection ref = oracle::hausdorff(p);
    CHECK(std::abs(impl.distance - ref.distance) < 1e-5);
    CHECK((impl.nearest.values() - ref.nearest).lpNorm<Eigen::Infinity>() < 1e-3);
  }
  const oracle::Projection scattered = oracle::hausdorff(kScattered);
  const UnimodalProjection impl = hausdorff_to_unimodal(Pmf(kScattered));
  CHECK(impl.distance > 0);
  CHECK(std::abs(impl.distance - scattered.distance) < 1e-5);
}
