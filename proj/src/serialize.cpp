#include "ordino/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ordino {

namespace {

constexpr const char* kCheckpointFormat = "ordino-checkpoint-v1";

std::vector<double> to_flat(const Eigen::MatrixXd& m) {  // row-major
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return flat;
}

Eigen::MatrixXd from_flat(const std::vector<double>& flat, Eigen::Index rows,
                          Eigen::Index cols) {
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw std::runtime_error("checkpoint: weight block has the wrong size");
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[i++];
  return m;
}

Eigen::VectorXd vector_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

std::vector<double> vector_to(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string to_string(LinkKind link) {
  switch (link) {
    case LinkKind::Sl: return "sl";
    case LinkKind::Vsl: return "vsl";
    case LinkKind::Cl: return "cl";
    case LinkKind::Pocl: return "pocl";
    case LinkKind::Povsl: return "povsl";
    case LinkKind::Maul: return "mix";
  }
  return "?";
}

std::string to_string(RhoKind rho) {
  switch (rho) {
    case RhoKind::Exp: return "exp";
    case RhoKind::Square: return "square";
    case RhoKind::Softplus: return "softplus";
  }
  return "?";
}

std::string to_string(TauKind tau) {
  switch (tau) {
    case TauKind::Abs: return "abs";
    case TauKind::Square: return "square";
  }
  return "?";
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::Nll: return "nll";
    case Metric::Mze: return "mze";
    case Metric::Mae: return "mae";
    case Metric::Mse: return "mse";
  }
  return "?";
}

LinkKind link_from_string(const std::string& s) {
  if (s == "sl") return LinkKind::Sl;
  if (s == "vsl") return LinkKind::Vsl;
  if (s == "cl") return LinkKind::Cl;
  if (s == "pocl") return LinkKind::Pocl;
  if (s == "povsl") return LinkKind::Povsl;
  if (s == "mix" || s == "maul") return LinkKind::Maul;
  throw std::invalid_argument("unknown model '" + s + "'");
}

RhoKind rho_from_string(const std::string& s) {
  if (s == "exp") return RhoKind::Exp;
  if (s == "square") return RhoKind::Square;
  if (s == "softplus") return RhoKind::Softplus;
  throw std::invalid_argument("unknown rho '" + s + "'");
}

TauKind tau_from_string(const std::string& s) {
  if (s == "abs") return TauKind::Abs;
  if (s == "square") return TauKind::Square;
  throw std::invalid_argument("unknown tau '" + s + "'");
}

Metric metric_from_string(const std::string& s) {
  if (s == "nll") return Metric::Nll;
  if (s == "mze") return Metric::Mze;
  if (s == "mae") return Metric::Mae;
  if (s == "mse") return Metric::Mse;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

nlohmann::json spec_to_json(const LikelihoodSpec& spec) {
  return {{"link", to_string(spec.link)},
          {"rho", to_string(spec.rho)},
          {"tau", to_string(spec.tau)},
          {"mixture_rate", spec.mixture_rate},
          {"num_classes", spec.num_classes}};
}

LikelihoodSpec spec_from_json(const nlohmann::json& j) {
  LikelihoodSpec spec;
  spec.link = link_from_string(j.at("link").get<std::string>());
  spec.rho = rho_from_string(j.at("rho").get<std::string>());
  spec.tau = tau_from_string(j.at("tau").get<std::string>());
  spec.mixture_rate = j.at("mixture_rate").get<double>();
  spec.num_classes = j.at("num_classes").get<int>();
  spec.validate();
  return spec;
}

nlohmann::json checkpoint_to_json(const Model& model,
                                  const Standardizer& standardizer) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["spec"] = spec_to_json(model.spec);
  j["layer_sizes"] = model.net.layer_sizes();
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const auto& w : model.net.weights) weights.push_back(to_flat(w));
  for (const auto& b : model.net.biases) biases.push_back(vector_to(b));
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["po_bias"] = vector_to(model.po_bias);
  j["standardizer"] = {{"mean", vector_to(standardizer.mean)},
                       {"scale", vector_to(standardizer.scale)}};
  return j;
}

void checkpoint_from_json(const nlohmann::json& j, Model& model,
                          Standardizer& standardizer) {
  if (j.value("format", "") != kCheckpointFormat)
    throw std::runtime_error("checkpoint: unknown format tag");
  model.spec = spec_from_json(j.at("spec"));
  const std::vector<int> sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (sizes.size() < 2) throw std::runtime_error("checkpoint: bad layer sizes");
  model.net.weights.clear();
  model.net.biases.clear();
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() + 1 != sizes.size() || biases.size() + 1 != sizes.size())
    throw std::runtime_error("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    model.net.weights.push_back(from_flat(weights[l].get<std::vector<double>>(),
                                          sizes[l + 1], sizes[l]));
    const Eigen::VectorXd b = vector_from(biases[l].get<std::vector<double>>());
    if (b.size() != sizes[l + 1])
      throw std::runtime_error("checkpoint: bias block has the wrong size");
    model.net.biases.push_back(b);
  }
  model.po_bias = vector_from(j.at("po_bias").get<std::vector<double>>());
  if (model.po_bias.size() != model.spec.po_bias_dim())
    throw std::runtime_error("checkpoint: threshold block has the wrong size");
  standardizer.mean =
      vector_from(j.at("standardizer").at("mean").get<std::vector<double>>());
  standardizer.scale =
      vector_from(j.at("standardizer").at("scale").get<std::vector<double>>());
  if (standardizer.mean.size() != model.net.input_dim() ||
      standardizer.scale.size() != model.net.input_dim())
    throw std::runtime_error("checkpoint: standardizer does not match the network");
}

void save_checkpoint(const std::string& path, const Model& model,
                     const Standardizer& standardizer) {
  write_text_atomic(path, checkpoint_to_json(model, standardizer).dump(2) + "\n");
}

void load_checkpoint(const std::string& path, Model& model,
                     Standardizer& standardizer) {
  checkpoint_from_json(nlohmann::json::parse(read_text(path)), model, standardizer);
}

Dataset load_dataset_manifest(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text(path));
  if (!j.contains("csv"))
    throw std::runtime_error("dataset manifest: missing 'csv' entry");
  std::filesystem::path csv(j.at("csv").get<std::string>());
  if (csv.is_relative()) csv = std::filesystem::path(path).parent_path() / csv;
  const int bins = j.value("bins", 0);
  if (bins != 0 && bins < 2)
    throw std::runtime_error("dataset manifest: bins must be 0 or >= 2");
  const Eigen::MatrixXd table =
      load_csv_matrix(csv.string(), j.value("header", false));
  return dataset_from_matrix(j.value("name", csv.stem().string()), table,
                             j.value("label_column", -1), bins);
}

nlohmann::json profile_to_json(const UnimodalityProfile& profile) {
  return {{"n", profile.n},
          {"num_classes", profile.num_classes},
          {"ur", profile.ur},
          {"mhd", profile.mhd},
          {"max_hd", profile.max_hd},
          {"histogram",
           {{"bins", UnimodalityProfile::kBins},
            {"support", {0.0, UnimodalityProfile::support_max()}},
            {"ratios", profile.histogram}}}};
}

std::string profile_to_csv(const UnimodalityProfile& profile) {
  std::ostringstream out;
  out.precision(17);
  out << "n,num_classes,ur,mhd,max_hd\n";
  out << profile.n << ',' << profile.num_classes << ',' << profile.ur << ','
      << profile.mhd << ',' << profile.max_hd << '\n';
  return out.str();
}

std::string histogram_to_tsv(const UnimodalityProfile& profile) {
  std::ostringstream out;
  out.precision(17);
  const double width =
      UnimodalityProfile::support_max() / UnimodalityProfile::kBins;
  out << "bin_low\tbin_high\tratio\tdensity\n";
  for (int b = 0; b < UnimodalityProfile::kBins; ++b) {
    const double ratio = profile.histogram[static_cast<std::size_t>(b)];
    out << b * width << '\t' << (b + 1) * width << '\t' << ratio << '\t'
        << ratio / width << '\n';
  }
  return out.str();
}

nlohmann::json metrics_to_json(const MetricsReport& metrics) {
  return {{"nll", metrics.nll},
          {"mze", metrics.mze},
          {"mae", metrics.mae},
          {"mse", metrics.mse},
          {"n_test", metrics.n_test}};
}

nlohmann::json trial_report_to_json(const TrialReport& report) {
  return {{"trial", report.trial},
          {"seed", report.seed},
          {"validation_metric", to_string(report.validation_metric)},
          {"selected",
           {{"r", report.selected.r},
            {"lambda", report.selected.lambda},
            {"epoch", report.selected.epoch},
            {"grid_index", report.selected.grid_index},
            {"validation_value", report.selected.validation_value}}},
          {"test", metrics_to_json(report.test)},
          {"ud", {{"ur", report.ud_ur}, {"mhd", report.ud_mhd}, {"n", report.ud_n}}},
          {"train_nll_first", report.train_nll_first},
          {"train_nll_last", report.train_nll_last}};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace ordino
