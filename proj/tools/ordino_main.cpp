// Command-line front end: synthetic simplex analysis, dataset profiling with a
// fitted checkpoint, the training/benchmark protocol, and rank-test comparison
// tables. Every command writes a manifest before any result file and is byte
// reproducible from (config, seed).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "ordino/analysis.hpp"
#include "ordino/data.hpp"
#include "ordino/parallel.hpp"
#include "ordino/rng.hpp"
#include "ordino/serialize.hpp"
#include "ordino/training.hpp"
#include "ordino/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ordino;

namespace {

constexpr std::uint64_t kTrialStream = 0x300000000ull;
constexpr const char* kReportFormat = "ordino-train-report-v1";
constexpr const char* kManifestComment = "# manifest: manifest.json\n";

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("ORDINO_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

// The manifest is the only file carrying wall-clock state; result files
// reference it and stay byte-identical across reruns.
void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, const std::vector<std::string>& outputs) {
  json manifest;
  manifest["format"] = "ordino-manifest-v1";
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["started_at"] = timestamp_utc();
  manifest["config"] = config;
  manifest["outputs"] = outputs;
  write_text_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw std::invalid_argument("--out is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// --dataset takes either a csv file or a json dataset manifest.
Dataset load_any_dataset(const std::string& path, int label_column, bool header) {
  if (fs::path(path).extension() == ".json") return load_dataset_manifest(path);
  CsvOptions csv;
  csv.label_column = label_column;
  csv.has_header = header;
  return load_csv(path, csv);
}

struct SynthArgs {
  int k = 0;
  int n = 1000;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

int run_synth(const SynthArgs& args) {
  if (args.k < 3) throw std::invalid_argument("synth: --k must be >= 3");
  if (args.n < 1) throw std::invalid_argument("synth: --n must be >= 1");
  const int threads = resolve_threads(args.threads);
  const fs::path dir = prepare_out_dir(args.out);
  const json config{{"k", args.k}, {"n", args.n}, {"seed", args.seed},
                    {"threads", threads}};
  write_manifest(dir, "synth", config,
                 {"profile.json", "profile.csv", "histogram.tsv"});

  const Eigen::MatrixXd samples = sample_uniform_simplex(args.k, args.n, args.seed);
  const UnimodalityProfile prof = profile(samples, threads);

  json out = profile_to_json(prof);
  out["manifest"] = "manifest.json";
  out["seed"] = args.seed;
  out["closed_form_ur"] = unimodal_fraction_exact(args.k);
  write_text_atomic((dir / "profile.json").string(), out.dump(2) + "\n");
  write_text_atomic((dir / "profile.csv").string(),
                    kManifestComment + profile_to_csv(prof));
  write_text_atomic((dir / "histogram.tsv").string(),
                    kManifestComment + histogram_to_tsv(prof));
  std::cout << "synth: k=" << args.k << " n=" << args.n << " ur=" << prof.ur
            << " mhd=" << prof.mhd << '\n';
  return 0;
}

struct ProfileArgs {
  std::string dataset;
  std::string checkpoint;
  std::string out;
  int label_column = -1;
  bool has_header = false;
  int threads = 0;
};

int run_profile(const ProfileArgs& args) {
  const int threads = resolve_threads(args.threads);
  Model model;
  Standardizer standardizer;
  load_checkpoint(args.checkpoint, model, standardizer);

  const Dataset data =
      load_any_dataset(args.dataset, args.label_column, args.has_header);
  if (data.dim() != model.net.input_dim())
    throw std::invalid_argument(
        "profile: dataset has " + std::to_string(data.dim()) +
        " features but the checkpoint expects " +
        std::to_string(model.net.input_dim()));
  if (data.num_classes > model.spec.num_classes)
    throw std::invalid_argument("profile: dataset has more classes than the checkpoint");

  const fs::path dir = prepare_out_dir(args.out);
  const json config{{"dataset", args.dataset},
                    {"checkpoint", args.checkpoint},
                    {"label_column", args.label_column},
                    {"header", args.has_header},
                    {"threads", threads}};
  write_manifest(dir, "profile", config,
                 {"profile.json", "profile.csv", "histogram.tsv"});

  const Eigen::MatrixXd features = standardizer.apply(data.features);
  const UnimodalityProfile prof = profile(model.predict_matrix(features), threads);

  json out = profile_to_json(prof);
  out["manifest"] = "manifest.json";
  out["dataset"] = data.name;
  out["model"] = spec_to_json(model.spec);
  write_text_atomic((dir / "profile.json").string(), out.dump(2) + "\n");
  write_text_atomic((dir / "profile.csv").string(),
                    kManifestComment + profile_to_csv(prof));
  write_text_atomic((dir / "histogram.tsv").string(),
                    kManifestComment + histogram_to_tsv(prof));
  std::cout << "profile: n=" << prof.n << " ur=" << prof.ur << " mhd=" << prof.mhd
            << '\n';
  return 0;
}

struct TrainArgs {
  std::string dataset;
  std::string model = "sl";
  std::string rho = "exp";
  std::string tau = "square";
  std::string metric = "nll";
  std::vector<double> r_grid;
  std::vector<double> lambda_grid;
  bool uprl = false;
  bool joint_sweep = false;
  double delta = 0.05;
  int n_tra = 0;
  int n_val = 100;
  int trials = 1;
  std::uint64_t seed = 0;
  int epochs = 300;
  int batch_size = 16;
  int label_column = -1;
  bool has_header = false;
  std::string config_path;
  std::string out;
  int threads = 0;
};

// Config-file values fill in anything the command line left untouched
// (flag > file > default).
void merge_config_file(TrainArgs& args, const CLI::App* cmd) {
  if (args.config_path.empty()) return;
  const json cfg = json::parse(read_text(args.config_path));
  auto unset = [&](const std::string& flag) {
    return cmd->count(flag) == 0;
  };
  if (cfg.contains("model") && unset("--model")) args.model = cfg["model"];
  if (cfg.contains("rho") && unset("--rho")) args.rho = cfg["rho"];
  if (cfg.contains("tau") && unset("--tau")) args.tau = cfg["tau"];
  if (cfg.contains("metric") && unset("--metric")) args.metric = cfg["metric"];
  if (cfg.contains("r_grid") && unset("--r-grid"))
    args.r_grid = cfg["r_grid"].get<std::vector<double>>();
  if (cfg.contains("lambda_grid") && unset("--lambda-grid"))
    args.lambda_grid = cfg["lambda_grid"].get<std::vector<double>>();
  if (cfg.contains("uprl") && unset("--uprl")) args.uprl = cfg["uprl"];
  if (cfg.contains("joint_sweep") && unset("--joint-sweep"))
    args.joint_sweep = cfg["joint_sweep"];
  if (cfg.contains("delta") && unset("--delta")) args.delta = cfg["delta"];
  if (cfg.contains("n_tra") && unset("--n-tra")) args.n_tra = cfg["n_tra"];
  if (cfg.contains("n_val") && unset("--n-val")) args.n_val = cfg["n_val"];
  if (cfg.contains("trials") && unset("--trials")) args.trials = cfg["trials"];
  if (cfg.contains("seed") && unset("--seed")) args.seed = cfg["seed"];
  if (cfg.contains("epochs") && unset("--epochs")) args.epochs = cfg["epochs"];
  if (cfg.contains("batch_size") && unset("--batch-size"))
    args.batch_size = cfg["batch_size"];
  if (cfg.contains("label_column") && unset("--label-col"))
    args.label_column = cfg["label_column"];
  if (cfg.contains("header") && unset("--header")) args.has_header = cfg["header"];
  if (cfg.contains("threads") && unset("--threads")) args.threads = cfg["threads"];
}

json train_config_json(const TrainArgs& args, const TrainConfig& config,
                       const LikelihoodSpec& spec) {
  return {{"dataset", args.dataset},
          {"model", to_string(spec.link)},
          {"rho", to_string(spec.rho)},
          {"tau", to_string(spec.tau)},
          {"metric", to_string(config.validation_metric)},
          {"r_grid", config.r_grid},
          {"lambda_grid", args.uprl ? config.lambda_grid : std::vector<double>{}},
          {"uprl", args.uprl},
          {"joint_sweep", args.joint_sweep},
          {"delta", config.delta},
          {"n_tra", args.n_tra},
          {"n_val", args.n_val},
          {"trials", args.trials},
          {"seed", args.seed},
          {"epochs", config.epochs},
          {"batch_size", config.batch_size},
          {"label_column", args.label_column},
          {"header", args.has_header},
          {"standardize", true},  // features shifted/scaled by train statistics
          {"threads", args.threads}};
}

int run_train(TrainArgs& args, const CLI::App* cmd) {
  merge_config_file(args, cmd);
  if (args.n_tra < 1) throw std::invalid_argument("train: --n-tra is required");
  if (args.trials < 1) throw std::invalid_argument("train: --trials must be >= 1");
  const int threads = resolve_threads(args.threads);

  LikelihoodSpec spec;
  spec.link = link_from_string(args.model);
  spec.rho = rho_from_string(args.rho);
  spec.tau = tau_from_string(args.tau);

  const Dataset data =
      load_any_dataset(args.dataset, args.label_column, args.has_header);
  spec.num_classes = data.num_classes;
  spec.validate();
  for (const auto& [original, mapped] : data.label_map)
    if (static_cast<double>(mapped) != original)
      std::cerr << "train: label " << original << " remapped to " << mapped << '\n';

  TrainConfig base;
  base.epochs = args.epochs;
  base.batch_size = args.batch_size;
  base.validation_metric = metric_from_string(args.metric);
  base.delta = args.delta;
  if (!args.r_grid.empty()) base.r_grid = args.r_grid;
  base.lambda_grid = args.uprl ? (args.lambda_grid.empty() ? default_lambda_grid()
                                                           : args.lambda_grid)
                               : std::vector<double>{};
  base.validate();

  const fs::path dir = prepare_out_dir(args.out);
  std::vector<std::string> outputs{"report.json", "summary.csv"};
  std::vector<std::uint64_t> trial_seeds;
  for (int t = 0; t < args.trials; ++t)
    trial_seeds.push_back(substream(args.seed, kTrialStream + static_cast<std::uint64_t>(t)));
  char name[32];
  for (int t = 0; t < args.trials; ++t) {
    std::snprintf(name, sizeof(name), "checkpoint_%03d.json", t);
    outputs.emplace_back(name);
  }
  json config_echo = train_config_json(args, base, spec);
  config_echo["trial_seeds"] = trial_seeds;
  write_manifest(dir, "train", config_echo, outputs);

  // thread budget: spread across trials first, grid points within each trial
  const int outer = std::min(threads, args.trials);
  const int inner = std::max(1, threads / std::max(1, outer));

  std::vector<FitOutcome> outcomes(static_cast<std::size_t>(args.trials));
  const bool two_stage =
      args.uprl && spec.link == LinkKind::Maul && !args.joint_sweep;
  parallel_for(args.trials, outer, [&](int t) {
    const SplitSpec split_spec{args.n_tra, args.n_val, trial_seeds[static_cast<std::size_t>(t)]};
    const SplitIndices split = make_split(data, split_spec);
    TrainConfig config = base;
    config.seed = trial_seeds[static_cast<std::size_t>(t)];
    config.threads = inner;
    if (two_stage) {
      // pick the mixture rate by plain validation first, then sweep the
      // regularization strength at that rate
      TrainConfig stage_one = config;
      stage_one.lambda_grid.clear();
      const FitOutcome first = fit(data, split, spec, stage_one);
      TrainConfig stage_two = config;
      stage_two.r_grid = {first.report.selected.r};
      outcomes[static_cast<std::size_t>(t)] = fit(data, split, spec, stage_two);
    } else {
      outcomes[static_cast<std::size_t>(t)] = fit(data, split, spec, config);
    }
    outcomes[static_cast<std::size_t>(t)].report.trial = t;
  });

  json trials_json = json::array();
  std::map<std::string, std::vector<double>> metric_values;
  int interior_r = 0;
  for (int t = 0; t < args.trials; ++t) {
    const FitOutcome& out = outcomes[static_cast<std::size_t>(t)];
    std::snprintf(name, sizeof(name), "checkpoint_%03d.json", t);
    json ck = checkpoint_to_json(out.model, out.standardizer);
    ck["manifest"] = "manifest.json";
    write_text_atomic((dir / name).string(), ck.dump(2) + "\n");
    json trial = trial_report_to_json(out.report);
    trial["checkpoint"] = name;
    trial["manifest"] = "manifest.json";
    trials_json.push_back(std::move(trial));
    metric_values["nll"].push_back(out.report.test.nll);
    metric_values["mze"].push_back(out.report.test.mze);
    metric_values["mae"].push_back(out.report.test.mae);
    metric_values["mse"].push_back(out.report.test.mse);
    metric_values["ud_mhd"].push_back(out.report.ud_mhd);
    const double r = out.report.selected.r;
    if (r > 0.0 && r < 1.0) ++interior_r;
  }

  json summary;
  std::string csv_text = std::string(kManifestComment) + "metric,mean,q25,q50,q75\n";
  for (const auto& [metric, values] : metric_values) {
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    summary[metric] = {{"mean", mean},
                       {"q25", quantile(values, 0.25)},
                       {"q50", quantile(values, 0.50)},
                       {"q75", quantile(values, 0.75)}};
    std::ostringstream line;
    line.precision(17);
    line << metric << ',' << mean << ',' << quantile(values, 0.25) << ','
         << quantile(values, 0.50) << ',' << quantile(values, 0.75) << '\n';
    csv_text += line.str();
  }
  summary["interior_r_trials"] = interior_r;

  json report;
  report["format"] = kReportFormat;
  report["manifest"] = "manifest.json";
  report["dataset"] = {{"name", data.name},
                       {"n", data.n()},
                       {"d", data.dim()},
                       {"k", data.num_classes}};
  report["model"] = spec_to_json(spec);
  report["config"] = config_echo;
  report["config"].erase("threads");  // worker count never changes the numbers
  report["trials"] = std::move(trials_json);
  report["summary"] = std::move(summary);
  write_text_atomic((dir / "report.json").string(), report.dump(2) + "\n");
  write_text_atomic((dir / "summary.csv").string(), csv_text);

  std::cout << "train: " << args.trials << " trial(s) of " << to_string(spec.link)
            << " on " << data.name << "; median test nll "
            << quantile(metric_values["nll"], 0.5) << '\n';
  return 0;
}

struct CompareArgs {
  std::string dir_a;
  std::string dir_b;
  double alpha = 0.05;
  int m = 0;  // 0: use the number of paired datasets
  std::string out;
};

struct LoadedReport {
  std::string dataset;
  std::map<std::string, std::vector<double>> metrics;
};

std::map<std::string, LoadedReport> scan_reports(const std::string& dir) {
  std::map<std::string, LoadedReport> reports;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    json j;
    try {
      j = json::parse(read_text(entry.path().string()));
    } catch (const json::parse_error&) {
      continue;
    }
    if (j.value("format", "") != kReportFormat) continue;
    LoadedReport report;
    report.dataset = j["dataset"]["name"];
    for (const auto& trial : j["trials"]) {
      report.metrics["nll"].push_back(trial["test"]["nll"].get<double>());
      report.metrics["mze"].push_back(trial["test"]["mze"].get<double>());
      report.metrics["mae"].push_back(trial["test"]["mae"].get<double>());
      report.metrics["mse"].push_back(trial["test"]["mse"].get<double>());
    }
    reports[report.dataset] = std::move(report);
  }
  return reports;
}

int run_compare(const CompareArgs& args) {
  const auto reports_a = scan_reports(args.dir_a);
  const auto reports_b = scan_reports(args.dir_b);
  if (reports_a.empty() || reports_b.empty())
    throw std::invalid_argument("compare: no training reports found");
  for (const auto& [dataset, report] : reports_a)
    if (!reports_b.count(dataset))
      throw std::invalid_argument("compare: dataset '" + dataset +
                                  "' is missing from side B");
  for (const auto& [dataset, report] : reports_b)
    if (!reports_a.count(dataset))
      throw std::invalid_argument("compare: dataset '" + dataset +
                                  "' is missing from side A");

  const int m = args.m > 0 ? args.m : static_cast<int>(reports_a.size());
  const fs::path dir = prepare_out_dir(args.out);
  const json config{{"a", args.dir_a}, {"b", args.dir_b}, {"alpha", args.alpha},
                    {"m", m}};
  write_manifest(dir, "compare", config, {"comparisons.csv", "tally.csv"});

  std::ostringstream detail;
  detail.precision(17);
  detail << kManifestComment
         << "dataset,metric,n_a,n_b,mean_a,mean_b,u,p,significant,winner\n";
  std::map<std::string, std::pair<int, int>> tally{
      {"nll", {0, 0}}, {"mze", {0, 0}}, {"mae", {0, 0}}, {"mse", {0, 0}}};
  for (const auto& [dataset, report_a] : reports_a) {
    const LoadedReport& report_b = reports_b.at(dataset);
    for (const std::string metric : {"nll", "mze", "mae", "mse"}) {
      const auto& a = report_a.metrics.at(metric);
      const auto& b = report_b.metrics.at(metric);
      const CompareVerdict v = bonferroni_compare(a, b, m, args.alpha);
      detail << dataset << ',' << metric << ',' << a.size() << ',' << b.size()
             << ',' << v.mean_a << ',' << v.mean_b << ',' << v.test.u_statistic
             << ',' << v.test.p_value << ',' << (v.significant ? 1 : 0) << ','
             << (v.winner == 1 ? "A" : v.winner == 2 ? "B" : "-") << '\n';
      if (v.winner == 1) tally[metric].first += 1;
      if (v.winner == 2) tally[metric].second += 1;
    }
  }
  std::ostringstream tally_text;
  tally_text << kManifestComment << "metric,a_wins,b_wins,datasets,alpha,m\n";
  for (const auto& [metric, wins] : tally)
    tally_text << metric << ',' << wins.first << ',' << wins.second << ','
               << reports_a.size() << ',' << args.alpha << ',' << m << '\n';
  write_text_atomic((dir / "comparisons.csv").string(), detail.str());
  write_text_atomic((dir / "tally.csv").string(), tally_text.str());
  for (const auto& [metric, wins] : tally)
    std::cout << "compare " << metric << ": " << wins.first << " A wins, "
              << wins.second << " B wins\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal regression with unimodality analytics"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Profile uniform random pmfs on the probability simplex");
  synth->add_option("--k", synth_args.k, "number of classes")->required();
  synth->add_option("--n", synth_args.n, "number of samples");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--threads", synth_args.threads, "worker threads");

  ProfileArgs profile_args;
  CLI::App* prof = app.add_subcommand(
      "profile", "Profile the predictions of a fitted checkpoint on a dataset");
  prof->add_option("--dataset", profile_args.dataset, "csv file or json dataset manifest")->required();
  prof->add_option("--checkpoint", profile_args.checkpoint, "model checkpoint")
      ->required();
  prof->add_option("--label-col", profile_args.label_column,
                   "label column (negative counts from the end)");
  prof->add_flag("--header", profile_args.has_header, "skip a header row");
  prof->add_option("--out", profile_args.out, "output directory")->required();
  prof->add_option("--threads", profile_args.threads, "worker threads");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train", "Train and evaluate a likelihood model over repeated splits");
  train->add_option("--dataset", train_args.dataset, "csv file or json dataset manifest")->required();
  train->add_option("--model", train_args.model,
                    "sl | vsl | mix | cl | pocl | povsl");
  train->add_option("--rho", train_args.rho, "exp | square | softplus");
  train->add_option("--tau", train_args.tau, "abs | square");
  train->add_option("--metric", train_args.metric,
                    "validation metric: nll | mze | mae | mse");
  train->add_option("--r-grid", train_args.r_grid, "mixture rates to sweep")
      ->delimiter(',');
  train->add_option("--lambda-grid", train_args.lambda_grid,
                    "regularization strengths to sweep")
      ->delimiter(',');
  train->add_flag("--uprl", train_args.uprl,
                  "add the unimodality penalty with a validated strength");
  train->add_flag("--joint-sweep", train_args.joint_sweep,
                  "sweep mixture rate and penalty strength jointly");
  train->add_option("--delta", train_args.delta, "penalty margin");
  train->add_option("--n-tra", train_args.n_tra, "training split size");
  train->add_option("--n-val", train_args.n_val, "validation split size");
  train->add_option("--trials", train_args.trials, "number of repeated splits");
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--epochs", train_args.epochs, "epochs per grid point");
  train->add_option("--batch-size", train_args.batch_size, "mini-batch size");
  train->add_option("--label-col", train_args.label_column, "label column");
  train->add_flag("--header", train_args.has_header, "skip a header row");
  train->add_option("--config", train_args.config_path, "json config file");
  train->add_option("--out", train_args.out, "output directory")->required();
  train->add_option("--threads", train_args.threads, "worker threads");

  CompareArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare", "Rank-test two training report directories dataset by dataset");
  compare->add_option("--a", compare_args.dir_a, "report directory A")->required();
  compare->add_option("--b", compare_args.dir_b, "report directory B")->required();
  compare->add_option("--alpha", compare_args.alpha, "significance level");
  compare->add_option("--m", compare_args.m, "comparison count for correction");
  compare->add_option("--out", compare_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (prof->parsed()) return run_profile(profile_args);
    if (train->parsed()) return run_train(train_args, train);
    if (compare->parsed()) return run_compare(compare_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
