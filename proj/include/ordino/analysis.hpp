#pragma once

#include <Eigen/Core>

#include <vector>

namespace ordino {

/// Dataset-level unimodality analytics: fraction of points that are unimodal
/// (distance below 1e-8), the mean and max distance to the unimodal set, and
/// a fixed 100-bin histogram over [0, sqrt(2)] so histograms from different
/// runs share a support.
struct UnimodalityProfile {
  static constexpr int kBins = 100;
  static double support_max();  // sqrt(2), the simplex diameter

  int n = 0;
  int num_classes = 0;
  double ur = 0;
  double mhd = 0;
  double max_hd = 0;
  std::vector<double> hd_samples;
  std::vector<double> histogram;  // per-bin ratios, summing to 1
};

/// Profiles a batch of pmfs (one per row); distances are computed in
/// parallel over points.
UnimodalityProfile profile(const Eigen::Ref<const Eigen::MatrixXd>& pmfs,
                           int threads = 1);

/// L1 distance between two ratio histograms on the shared support, with both
/// interpreted as densities.
double histogram_l1(const std::vector<double>& f, const std::vector<double>& g);

struct MannWhitneyResult {
  double u_statistic = 0;  // U of the first sample
  double p_value = 1;      // two-sided
  bool exact = false;
};

/// Rank-sum U with midrank ties. Uses the exact null distribution when the
/// smaller sample has at most 8 points and there are no ties; otherwise the
/// normal approximation with tie correction and continuity correction.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a,
                                 const std::vector<double>& b);

struct CompareVerdict {
  MannWhitneyResult test;
  bool significant = false;
  int winner = 0;  // 0 none, 1 first sample, 2 second sample
  double mean_a = 0;
  double mean_b = 0;
};

/// Corrected two-sample comparison of error values: significant when
/// p < alpha / num_comparisons, the lower-mean side winning.
CompareVerdict bonferroni_compare(const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  int num_comparisons, double alpha = 0.05);

/// Probability that an exchangeable continuous random pmf over k classes is
/// unimodal: 2^(k-1) / k!.
double unimodal_fraction_exact(int k);

}  // namespace ordino
