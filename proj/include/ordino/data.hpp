#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ordino {

/// Feature matrix plus labels remapped to contiguous 1..K. `label_map`
/// records the original value behind each new label.
struct Dataset {
  std::string name;
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::pair<double, int>> label_map;  // original value -> new label

  int n() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

struct CsvOptions {
  int label_column = -1;  // negative counts from the end
  bool has_header = false;
};

/// Raw numeric matrix of a comma-separated file. Parse failures report the
/// offending row and column.
Eigen::MatrixXd load_csv_matrix(const std::string& path, bool has_header = false);

/// Builds a dataset from a numeric matrix. With bins = 0 the target column
/// must hold integers, remapped to contiguous 1..K preserving order; with
/// bins >= 2 a continuous target is discretized into equal-frequency bins.
Dataset dataset_from_matrix(const std::string& name,
                            const Eigen::Ref<const Eigen::MatrixXd>& table,
                            int label_column, int bins = 0);

/// Loads a comma-separated numeric file; one column holds integer labels.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

/// Rank-based equal-frequency discretization into `bins` labels; boundary
/// ties go to the lower bin via stable sort order.
std::vector<int> equal_frequency_bins(const std::vector<double>& values, int bins);

struct SplitSpec {
  int n_train = 0;
  int n_val = 100;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<int> train, val, test;
};

/// Disjoint seed-deterministic train/validation/test split; test takes the
/// remainder.
SplitIndices make_split(const Dataset& data, const SplitSpec& spec);

/// n points uniform on the probability simplex, one per row: normalized
/// unit-rate exponentials (gamma variates of shape one).
Eigen::MatrixXd sample_uniform_simplex(int k, int n, std::uint64_t seed);

/// Column-wise shift and scale fitted on the training rows only; columns with
/// zero variance are shifted but left unscaled.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
                          const std::vector<int>& rows);
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& features) const;
};

}  // namespace ordino
