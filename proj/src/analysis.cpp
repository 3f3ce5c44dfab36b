#include "ordino/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ordino/parallel.hpp"
#include "ordino/pmf.hpp"
#include "ordino/simplex.hpp"

namespace ordino {

namespace {

constexpr double kMembershipTol = 1e-8;

// Midranks (1-based) of the pooled samples plus the tie statistics needed by
// the normal approximation.
struct Ranking {
  std::vector<double> ranks_a;
  double tie_sum = 0;  // sum of t^3 - t over tie groups
  bool has_ties = false;
};

Ranking rank_pooled(const std::vector<double>& a, const std::vector<double>& b) {
  struct Item {
    double value;
    bool from_a;
  };
  std::vector<Item> pooled;
  pooled.reserve(a.size() + b.size());
  for (double v : a) pooled.push_back({v, true});
  for (double v : b) pooled.push_back({v, false});
  std::sort(pooled.begin(), pooled.end(),
            [](const Item& x, const Item& y) { return x.value < y.value; });

  Ranking out;
  out.ranks_a.reserve(a.size());
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    const double t = static_cast<double>(j - i);
    if (t > 1) {
      out.has_ties = true;
      out.tie_sum += t * t * t - t;
    }
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t r = i; r < j; ++r)
      if (pooled[r].from_a) out.ranks_a.push_back(midrank);
    i = j;
  }
  return out;
}

// P(U <= u_max) under the null, counting arrangements with the standard
// two-sample recursion; sizes (m, n) with m small.
double exact_cdf(int m, int n, long long u_max) {
  const long long span = static_cast<long long>(m) * n;
  if (u_max < 0) return 0.0;
  if (u_max >= span) return 1.0;
  // count[i][u] = number of interleavings of i first-sample points among the
  // second sample processed so far with statistic u; recursion
  // f(i, j, u) = f(i, j-1, u) + f(i-1, j, u-j), updated in place over j.
  std::vector<std::vector<double>> count(
      static_cast<std::size_t>(m) + 1,
      std::vector<double>(static_cast<std::size_t>(span) + 1, 0.0));
  for (int i = 0; i <= m; ++i) count[static_cast<std::size_t>(i)][0] = 1.0;
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= m; ++i)
      for (long long u = j; u <= span; ++u)
        count[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)] +=
            count[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(u - j)];
  double below = 0, total = 0;
  for (long long u = 0; u <= span; ++u) {
    total += count[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)];
    if (u <= u_max) below += count[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)];
  }
  return below / total;
}

}  // namespace

double UnimodalityProfile::support_max() { return std::sqrt(2.0); }

UnimodalityProfile profile(const Eigen::Ref<const Eigen::MatrixXd>& pmfs,
                           int threads) {
  const int n = static_cast<int>(pmfs.rows());
  if (n == 0) throw std::invalid_argument("profile: empty pmf batch");
  UnimodalityProfile out;
  out.n = n;
  out.num_classes = static_cast<int>(pmfs.cols());
  out.hd_samples.assign(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, threads, [&](int i) {
    const Pmf p(pmfs.row(i).transpose());
    out.hd_samples[static_cast<std::size_t>(i)] = hausdorff_to_unimodal(p).distance;
  });
  out.histogram.assign(UnimodalityProfile::kBins, 0.0);
  const double width = UnimodalityProfile::support_max() / UnimodalityProfile::kBins;
  for (double hd : out.hd_samples) {
    out.ur += hd < kMembershipTol ? 1.0 : 0.0;
    out.mhd += hd;
    out.max_hd = std::max(out.max_hd, hd);
    int bin = static_cast<int>(hd / width);
    if (bin >= UnimodalityProfile::kBins) bin = UnimodalityProfile::kBins - 1;
    out.histogram[static_cast<std::size_t>(bin)] += 1.0;
  }
  out.ur /= n;
  out.mhd /= n;
  for (double& ratio : out.histogram) ratio /= n;
  return out;
}

double histogram_l1(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() != g.size() || f.empty())
    throw std::invalid_argument("histogram_l1: binning mismatch");
  const double width =
      UnimodalityProfile::support_max() / static_cast<double>(f.size());
  double sum = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    sum += std::abs(f[i] / width - g[i] / width) * width;
  return sum;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("mann_whitney_u: empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const Ranking ranking = rank_pooled(a, b);
  const double rank_sum =
      std::accumulate(ranking.ranks_a.begin(), ranking.ranks_a.end(), 0.0);
  const double u_a = rank_sum - na * (na + 1.0) / 2.0;
  const double u_b = na * nb - u_a;

  MannWhitneyResult res;
  res.u_statistic = u_a;
  const std::size_t n_min = std::min(a.size(), b.size());
  if (!ranking.has_ties && n_min <= 8) {
    res.exact = true;
    const long long u_small = std::llround(std::min(u_a, u_b));
    const double cdf = exact_cdf(static_cast<int>(n_min),
                                 static_cast<int>(std::max(a.size(), b.size())),
                                 u_small);
    res.p_value = std::min(1.0, 2.0 * cdf);
    return res;
  }

  const double total = na + nb;
  const double mu = na * nb / 2.0;
  double variance = na * nb / 12.0 * (total + 1.0);
  if (total > 1.0)
    variance -= na * nb / 12.0 * ranking.tie_sum / (total * (total - 1.0));
  if (variance <= 0.0) {  // all values tied
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(u_a - mu) - 0.5) / std::sqrt(variance);
  res.p_value = std::erfc(z / std::sqrt(2.0));
  return res;
}

CompareVerdict bonferroni_compare(const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  int num_comparisons, double alpha) {
  if (num_comparisons < 1)
    throw std::invalid_argument("bonferroni_compare: need at least one comparison");
  CompareVerdict verdict;
  verdict.test = mann_whitney_u(a, b);
  verdict.mean_a = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  verdict.mean_b = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  verdict.significant = verdict.test.p_value < alpha / num_comparisons;
  if (verdict.significant && verdict.mean_a != verdict.mean_b)
    verdict.winner = verdict.mean_a < verdict.mean_b ? 1 : 2;
  return verdict;
}

double unimodal_fraction_exact(int k) {
  if (k < 2) throw std::invalid_argument("unimodal_fraction_exact: k must be >= 2");
  double fraction = 1.0;
  for (int j = 2; j <= k; ++j) fraction *= 2.0 / j;
  return fraction;
}

}  // namespace ordino
