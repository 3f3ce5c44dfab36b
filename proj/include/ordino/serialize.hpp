#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ordino/analysis.hpp"
#include "ordino/data.hpp"
#include "ordino/model.hpp"
#include "ordino/training.hpp"

namespace ordino {

std::string to_string(LinkKind link);
std::string to_string(RhoKind rho);
std::string to_string(TauKind tau);
std::string to_string(Metric metric);
LinkKind link_from_string(const std::string& s);
RhoKind rho_from_string(const std::string& s);
TauKind tau_from_string(const std::string& s);
Metric metric_from_string(const std::string& s);

nlohmann::json spec_to_json(const LikelihoodSpec& spec);
LikelihoodSpec spec_from_json(const nlohmann::json& j);

/// Versioned checkpoint carrying the spec, layer shapes, row-major weights,
/// any PO thresholds, and the feature standardizer. Values round-trip exactly.
nlohmann::json checkpoint_to_json(const Model& model, const Standardizer& standardizer);
void checkpoint_from_json(const nlohmann::json& j, Model& model,
                          Standardizer& standardizer);
void save_checkpoint(const std::string& path, const Model& model,
                     const Standardizer& standardizer);
void load_checkpoint(const std::string& path, Model& model,
                     Standardizer& standardizer);

/// Dataset manifest: {"name", "csv", "label_column" (default -1), "header"
/// (default false), "bins" (default 0, meaning integer labels; >= 2
/// discretizes a continuous target into equal-frequency bins)}. A relative
/// csv path resolves against the manifest's directory.
Dataset load_dataset_manifest(const std::string& path);

nlohmann::json profile_to_json(const UnimodalityProfile& profile);
std::string profile_to_csv(const UnimodalityProfile& profile);
std::string histogram_to_tsv(const UnimodalityProfile& profile);

nlohmann::json metrics_to_json(const MetricsReport& metrics);
nlohmann::json trial_report_to_json(const TrialReport& report);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace ordino
