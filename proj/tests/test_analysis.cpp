#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ordino/analysis.hpp"
#include "ordino/data.hpp"
#include "ordino/pmf.hpp"
#include "ordino/simplex.hpp"
#include "support/oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace ordino;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Exact two-sided p over all C(8,4) splits of the pooled values.
double brute_force_p_4v4(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  // observed statistic: count of (a, b) pairs with a above b
  double u_obs = 0;
  for (double x : a)
    for (double y : b) u_obs += x > y ? 1.0 : 0.0;
  const double u_min = std::min(u_obs, 16.0 - u_obs);

  std::vector<int> mask{1, 1, 1, 1, 0, 0, 0, 0};
  std::sort(mask.begin(), mask.end());
  double at_or_below = 0, total = 0;
  do {
    double u = 0;
    for (int i = 0; i < 8; ++i)
      if (mask[static_cast<std::size_t>(i)])
        for (int j = 0; j < 8; ++j)
          if (!mask[static_cast<std::size_t>(j)] && i > j) u += 1.0;
    total += 1.0;
    if (u <= u_min) at_or_below += 1.0;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return std::min(1.0, 2.0 * at_or_below / total);
}

int count_unimodal_permutations(int k) {
  std::vector<double> values(static_cast<std::size_t>(k));
  std::iota(values.begin(), values.end(), 1.0);
  int count = 0;
  std::sort(values.begin(), values.end());
  do {
    const Eigen::Map<const VectorXd> v(values.data(), k);
    count += oracle::unimodal(v, 0.0) ? 1 : 0;
  } while (std::next_permutation(values.begin(), values.end()));
  return count;
}

}  // namespace

TEST_CASE("profile of unimodal inputs") {
  MatrixXd pmfs(3, 5);
  pmfs.row(0) = vec({.1, .2, .4, .2, .1}).transpose();
  pmfs.row(1) = vec({.5, .3, .1, .06, .04}).transpose();
  pmfs.row(2) = VectorXd::Constant(5, 0.2).transpose();
  const UnimodalityProfile prof = profile(pmfs);
  CHECK(prof.ur == 1.0);
  CHECK(prof.mhd == 0.0);
  CHECK(prof.max_hd == 0.0);
  CHECK(prof.histogram[0] == 1.0);
  CHECK(std::accumulate(prof.histogram.begin(), prof.histogram.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("profile of uniform simplex samples matches the combinatorial rate") {
  const int n = 10000, k = 5;
  const MatrixXd samples = sample_uniform_simplex(k, n, 99);
  const UnimodalityProfile prof = profile(samples, 4);
  const double expect = unimodal_fraction_exact(k);  // 2/15
  const double sigma = std::sqrt(expect * (1 - expect) / n);
  CHECK(std::abs(prof.ur - expect) < 3 * sigma);
  CHECK(prof.mhd == doctest::Approx(0.1000).epsilon(0.07));
  CHECK(prof.max_hd <= std::sqrt(2.0));
  CHECK(prof.n == n);
}

TEST_CASE("profile of a single ragged point") {
  const VectorXd ragged = vec({.15, 0, .2, 0, .1, .3, .05, 0, .05, .15});
  MatrixXd pmfs(1, 10);
  pmfs.row(0) = ragged.transpose();
  const UnimodalityProfile prof = profile(pmfs);
  CHECK(prof.ur == 0.0);
  CHECK(prof.mhd == doctest::Approx(oracle::hausdorff(ragged).distance).epsilon(1e-5));
}

TEST_CASE("monte carlo unimodality rate tracks the closed form") {
  for (int k : {4, 6}) {
    const int n = 2000;
    const MatrixXd samples = sample_uniform_simplex(k, n, 7 + k);
    int count = 0;
    for (int i = 0; i < n; ++i)
      count += is_unimodal(samples.row(i).transpose()) ? 1 : 0;
    const double expect = unimodal_fraction_exact(k);
    const double sigma = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(static_cast<double>(count) / n - expect) <= 3 * sigma);
  }
}

TEST_CASE("histogram distance") {
  std::vector<double> f(100, 0.0), g(100, 0.0);
  f[3] = 1.0;
  g[3] = 1.0;
  CHECK(histogram_l1(f, g) == 0.0);
  g[3] = 0.0;
  g[60] = 1.0;
  CHECK(histogram_l1(f, g) == doctest::Approx(2.0).epsilon(1e-12));

  const std::vector<double> f4{.5, .5, 0., 0.};
  const std::vector<double> g4{0., .25, .25, .5};
  CHECK(histogram_l1(f4, g4) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(histogram_l1(f4, f), std::invalid_argument);
}

TEST_CASE("rank test on separated triples gives the textbook value") {
  const MannWhitneyResult res = mann_whitney_u({1, 2, 3}, {4, 5, 6});
  CHECK(res.exact);
  CHECK(res.u_statistic == 0.0);
  CHECK(res.p_value == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("rank test on identical samples is insignificant") {
  const MannWhitneyResult res = mann_whitney_u({2, 2, 2, 2}, {2, 2, 2, 2});
  CHECK_FALSE(res.exact);  // ties force the approximate path
  CHECK(res.p_value == doctest::Approx(1.0));
}

TEST_CASE("exact path agrees with brute-force enumeration on all 4v4 splits") {
  // every way of dealing the values 1..8 into two hands of four
  std::vector<int> mask{1, 1, 1, 1, 0, 0, 0, 0};
  std::sort(mask.begin(), mask.end());
  int checked = 0;
  do {
    std::vector<double> a, b;
    for (int i = 0; i < 8; ++i)
      (mask[static_cast<std::size_t>(i)] ? a : b).push_back(i + 1.0);
    const MannWhitneyResult res = mann_whitney_u(a, b);
    CHECK(res.exact);
    CHECK(res.p_value == brute_force_p_4v4(a, b));
    ++checked;
  } while (std::next_permutation(mask.begin(), mask.end()));
  CHECK(checked == 70);
}

TEST_CASE("swapping the samples mirrors the statistic and keeps the p-value") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(6), b(9);
    for (double& x : a) x = static_cast<double>(rng() % 40);
    for (double& x : b) x = static_cast<double>(rng() % 40);
    const MannWhitneyResult ab = mann_whitney_u(a, b);
    const MannWhitneyResult ba = mann_whitney_u(b, a);
    CHECK(ab.u_statistic + ba.u_statistic ==
          doctest::Approx(static_cast<double>(a.size() * b.size())));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
  }
}

TEST_CASE("corrected comparisons") {
  std::vector<double> lo{1, 2, 3}, hi{4, 5, 6};
  CompareVerdict one = bonferroni_compare(lo, hi, 1, 0.15);
  CHECK(one.significant);  // p = 0.1 < 0.15
  CHECK(one.winner == 1);
  CompareVerdict many = bonferroni_compare(lo, hi, 24, 0.15);
  CHECK_FALSE(many.significant);
  CHECK(many.winner == 0);
  CHECK_THROWS_AS(bonferroni_compare(lo, hi, 0), std::invalid_argument);

  // three-dataset tally, hand-enumerated: strong separation wins for A, the
  // reversed pair wins for B, and identical samples stay undecided
  std::vector<std::pair<std::vector<double>, std::vector<double>>> sets{
      {{1, 2, 3, 4, 5, 6, 7, 8}, {11, 12, 13, 14, 15, 16, 17, 18}},
      {{21, 22, 23, 24, 25, 26, 27, 28}, {11, 12, 13, 14, 15, 16, 17, 18}},
      {{5, 6, 7, 8}, {5, 6, 7, 8}}};
  int a_wins = 0, b_wins = 0;
  for (const auto& [a, b] : sets) {
    const CompareVerdict v = bonferroni_compare(a, b, 3, 0.05);
    a_wins += v.winner == 1 ? 1 : 0;
    b_wins += v.winner == 2 ? 1 : 0;
  }
  CHECK(a_wins == 1);
  CHECK(b_wins == 1);
}

TEST_CASE("closed-form unimodal fraction") {
  CHECK(unimodal_fraction_exact(4) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(unimodal_fraction_exact(5) == doctest::Approx(2.0 / 15).epsilon(1e-15));
  CHECK(unimodal_fraction_exact(6) == doctest::Approx(4.0 / 90).epsilon(1e-15));
  for (int k = 2; k <= 8; ++k) {
    double factorial = 1;
    for (int j = 2; j <= k; ++j) factorial *= j;
    CHECK(unimodal_fraction_exact(k) ==
          doctest::Approx(count_unimodal_permutations(k) / factorial).epsilon(1e-12));
  }
  CHECK_THROWS_AS(unimodal_fraction_exact(1), std::invalid_argument);
}
