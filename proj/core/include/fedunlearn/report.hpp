#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedunlearn/metrics.hpp"

namespace fedunlearn {

/// Shortest round-trip decimal representation of a double (std::to_chars).
/// All CSV/JSON numbers go through this so emitted files re-parse to the same
/// values and identical runs produce identical bytes.
std::string format_double(double v);

struct ModelMetrics {
  double test_acc = 0.0;
  double target_acc = 0.0;
  double mia_acc = 0.0;
  std::optional<double> asr;
  std::optional<double> backdoor_acc;
};

struct TrialRecord {
  uint64_t trial_seed = 0;
  ModelMetrics original;   // theta_i
  ModelMetrics benchmark;  // theta_r
  ModelMetrics reset;      // post-reset, pre-retrain
  ModelMetrics unlearned;  // theta_u
  double nta_value = 0.0;
  NfsResult nfs_target_value;
  NfsResult nfs_mia_value;
  double rtr_value = 0.0;
  double bee_value = 0.0;
  double train_seconds_original = 0.0;
  double train_seconds_benchmark = 0.0;
  double unlearn_seconds = 0.0;
  double single_epoch_seconds = 0.0;
};

struct MetricsReport {
  std::vector<TrialRecord> trials;
  bool has_backdoor = false;

  TrialStats stats(double (*extract)(const TrialRecord&)) const;
};

/// Deterministic metric table, rows metric,model,mean,std. Wall-clock derived
/// quantities (rtr, bee, raw timings) are deliberately excluded; they live in
/// the timing CSV and the JSON report.
void write_report_csv(const MetricsReport& report, const std::string& path);

/// Per-trial wall-clock figures and the rtr/bee ratios.
void write_timing_csv(const MetricsReport& report, const std::string& path);

/// Full report: per-trial values, aggregates, significance flags, timings.
void write_report_json(const MetricsReport& report, const std::string& path);

}  // namespace fedunlearn
