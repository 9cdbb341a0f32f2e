#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedunlearn/backdoor.hpp"
#include "fedunlearn/dataset.hpp"
#include "fedunlearn/partition.hpp"
#include "fedunlearn/report.hpp"

namespace fedunlearn {

/// Invalid or unparseable configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  enum class Kind { Synth, Idx };
  Kind kind = Kind::Synth;
  // synth
  int classes = 10;
  int per_class = 100;
  int64_t dim = 784;
  double spread = 0.08;
  int border = 0;
  // idx
  std::string images_path;
  std::string labels_path;
};

struct PartitionConfig {
  enum class Kind { Random, Preferential };
  Kind kind = Kind::Random;
  std::vector<int> shared_classes;
  std::vector<int> exclusive_classes;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  double split_ratio = 0.7;
  int n_clients = 5;
  PartitionConfig partition;
  ForgetSelector forget = ForgetClient{0};
  std::optional<BackdoorSpec> backdoor;
  double alpha_removal = 0.4;
  int rounds = 6;
  int local_epochs = 1;
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  int retrain_epochs = 1;
  int retrain_aggregations = 1;  // server aggregations per retraining epoch
  double eps_h = 1e-12;
  std::vector<int64_t> hidden = {64, 32};
  int trials = 20;
  uint64_t master_seed = 0;
  std::string output_dir = "out";
  bool export_scores = true;
};

/// Parse and validate a JSON config document. Unknown keys and out-of-range
/// values raise ConfigError naming the offending field; omitted fields take
/// the documented defaults.
ExperimentConfig parse_config_json(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical (sorted-key) JSON rendering of the config with every default
/// made explicit.
std::string config_canonical_json(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of the canonical JSON.
uint64_t config_hash(const ExperimentConfig& cfg);

struct RunArtifacts {
  MetricsReport report;
  std::vector<uint64_t> trial_seeds;
  std::vector<std::string> files;  // paths written, relative to output_dir
};

/// Run the five-phase experiment (train, benchmark retrain, unlearn,
/// evaluate, report) for cfg.trials seeded trials and write report.csv,
/// timing.csv, report.json, manifest.json (and scores_trial0.csv when score
/// export is enabled) under cfg.output_dir.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
  double alpha = 0.0;
  double delta_test_acc = 0.0;  // mean over trials of acc(theta_u) - acc(theta_r)
  double mia_acc = 0.0;         // mean over trials of the unlearned model's MIA accuracy
};

/// One run_experiment per alpha (each in its own subdirectory) plus a
/// sweep.csv with rows alpha,delta_test_acc_vs_benchmark,mia_acc.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas);

struct BlockAudit {
  std::string name;
  size_t size = 0;
  size_t selected = 0;
  // score quantiles (linear interpolation)
  double q0 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q100 = 0.0;
};

/// Summarize a scores CSV (block,flat_index,tis,selected).
std::vector<BlockAudit> audit_scores_csv(const std::string& path);
std::string render_audit(const std::vector<BlockAudit>& audits);

}  // namespace fedunlearn
