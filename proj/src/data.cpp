#include "ordino/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ordino/rng.hpp"

namespace ordino {

namespace {

constexpr std::uint64_t kSplitStream = 0x5f5e1000ull;
constexpr std::uint64_t kSimplexStream = 0x51e9c7f2ull;

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw std::runtime_error("load_csv: cannot parse '" + cell + "' at row " +
                             std::to_string(row + 1) + ", column " +
                             std::to_string(col + 1));
  if (!std::isfinite(v))
    throw std::runtime_error("load_csv: non-finite value at row " +
                             std::to_string(row + 1) + ", column " +
                             std::to_string(col + 1));
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Eigen::MatrixXd load_csv_matrix(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_data_line = true;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    const std::vector<std::string> cells = split_line(line);
    if (first_data_line) {
      width = cells.size();
      first_data_line = false;
    } else if (cells.size() != width) {
      throw std::runtime_error("load_csv: row " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) +
                               " columns, expected " + std::to_string(width));
    }
    std::vector<double> parsed(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      parsed[c] = parse_cell(cells[c], rows.size(), c);
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path);
  if (width < 2)
    throw std::runtime_error("load_csv: need at least one feature column");
  Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

Dataset dataset_from_matrix(const std::string& name,
                            const Eigen::Ref<const Eigen::MatrixXd>& table,
                            int label_column, int bins) {
  const Eigen::Index width = table.cols();
  const Eigen::Index n = table.rows();
  int label_col = label_column;
  if (label_col < 0) label_col += static_cast<int>(width);
  if (label_col < 0 || label_col >= static_cast<int>(width))
    throw std::runtime_error("dataset: label column out of range");

  Dataset data;
  data.name = name;
  data.features.resize(n, width - 1);
  std::vector<double> raw_labels(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index f = 0;
    for (Eigen::Index c = 0; c < width; ++c) {
      if (static_cast<int>(c) == label_col)
        raw_labels[static_cast<std::size_t>(r)] = table(r, c);
      else
        data.features(r, f++) = table(r, c);
    }
  }

  if (bins > 0) {
    data.labels = equal_frequency_bins(raw_labels, bins);
    data.num_classes = bins;
    return data;
  }

  for (std::size_t r = 0; r < raw_labels.size(); ++r)
    if (std::abs(raw_labels[r] - std::round(raw_labels[r])) > 1e-9)
      throw std::runtime_error("dataset: non-integer label " +
                               std::to_string(raw_labels[r]) + " at row " +
                               std::to_string(r + 1));
  std::map<double, int> remap;
  for (double v : raw_labels) remap.emplace(v, 0);
  int next = 1;
  for (auto& kv : remap) kv.second = next++;
  data.num_classes = static_cast<int>(remap.size());
  data.labels.resize(raw_labels.size());
  for (std::size_t r = 0; r < raw_labels.size(); ++r)
    data.labels[r] = remap.at(raw_labels[r]);
  for (const auto& kv : remap) data.label_map.emplace_back(kv.first, kv.second);
  return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  return dataset_from_matrix(path, load_csv_matrix(path, options.has_header),
                             options.label_column, 0);
}

std::vector<int> equal_frequency_bins(const std::vector<double>& values, int bins) {
  const std::size_t n = values.size();
  if (bins < 2) throw std::invalid_argument("equal_frequency_bins: bins must be >= 2");
  if (static_cast<int>(n) < bins)
    throw std::invalid_argument("equal_frequency_bins: fewer values than bins");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi)
    throw std::invalid_argument("equal_frequency_bins: constant input");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<int> labels(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    // rank r falls in bin j when floor(n*(j-1)/bins) <= r < floor(n*j/bins)
    int bin = 1;
    while (rank >= n * static_cast<std::size_t>(bin) / static_cast<std::size_t>(bins))
      ++bin;
    labels[order[rank]] = bin;
  }
  return labels;
}

SplitIndices make_split(const Dataset& data, const SplitSpec& spec) {
  const int n = data.n();
  if (spec.n_train < 1 || spec.n_val < 1)
    throw std::invalid_argument("make_split: train and validation sizes must be >= 1");
  if (spec.n_train + spec.n_val >= n)
    throw std::invalid_argument("make_split: train + validation sizes exceed the data");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(substream(spec.seed, kSplitStream));
  shuffle_in_place(perm, rng);
  SplitIndices split;
  split.train.assign(perm.begin(), perm.begin() + spec.n_train);
  split.val.assign(perm.begin() + spec.n_train,
                   perm.begin() + spec.n_train + spec.n_val);
  split.test.assign(perm.begin() + spec.n_train + spec.n_val, perm.end());
  return split;
}

Eigen::MatrixXd sample_uniform_simplex(int k, int n, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("sample_uniform_simplex: k must be >= 2");
  if (n < 1) throw std::invalid_argument("sample_uniform_simplex: n must be >= 1");
  std::mt19937_64 rng(substream(seed, kSimplexStream));
  Eigen::MatrixXd samples(n, k);
  for (int i = 0; i < n; ++i) {
    double total = 0;
    for (int j = 0; j < k; ++j) {
      const double e = unit_exponential(rng);
      samples(i, j) = e;
      total += e;
    }
    samples.row(i) /= total;
  }
  return samples;
}

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
                               const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("Standardizer::fit: empty row set");
  const Eigen::Index d = features.cols();
  Standardizer st;
  st.mean = Eigen::VectorXd::Zero(d);
  st.scale = Eigen::VectorXd::Ones(d);
  for (int r : rows) st.mean += features.row(r).transpose();
  st.mean /= static_cast<double>(rows.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (int r : rows) {
    const Eigen::VectorXd centered = features.row(r).transpose() - st.mean;
    var += centered.cwiseProduct(centered);
  }
  var /= static_cast<double>(rows.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    const double s = std::sqrt(var[j]);
    st.scale[j] = s > 1e-12 ? s : 1.0;
  }
  return st;
}

Eigen::MatrixXd Standardizer::apply(
    const Eigen::Ref<const Eigen::MatrixXd>& features) const {
  Eigen::MatrixXd out = features.rowwise() - mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

}  // namespace ordino
