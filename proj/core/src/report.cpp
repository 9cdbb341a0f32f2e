#include "fedunlearn/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <json.hpp>

namespace fedunlearn {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

TrialStats MetricsReport::stats(double (*extract)(const TrialRecord&)) const {
  std::vector<double> values;
  values.reserve(trials.size());
  for (const auto& t : trials) values.push_back(extract(t));
  return trial_stats(values);
}

namespace {

using Extract = std::function<double(const TrialRecord&)>;

TrialStats stats_of(const MetricsReport& report, const Extract& extract) {
  std::vector<double> values;
  values.reserve(report.trials.size());
  for (const auto& t : report.trials) values.push_back(extract(t));
  return trial_stats(values);
}

struct ModelColumn {
  const char* name;
  const ModelMetrics& (*get)(const TrialRecord&);
};

constexpr ModelColumn kModels[] = {
    {"original", [](const TrialRecord& t) -> const ModelMetrics& { return t.original; }},
    {"benchmark", [](const TrialRecord& t) -> const ModelMetrics& { return t.benchmark; }},
    {"reset", [](const TrialRecord& t) -> const ModelMetrics& { return t.reset; }},
    {"unlearned", [](const TrialRecord& t) -> const ModelMetrics& { return t.unlearned; }},
};

void emit_row(std::ofstream& out, const MetricsReport& report, const std::string& metric, const std::string& model,
              const Extract& extract) {
  const TrialStats s = stats_of(report, extract);
  out << metric << ',' << model << ',' << format_double(s.mean) << ',' << format_double(s.stddev) << '\n';
}

}  // namespace

void write_report_csv(const MetricsReport& report, const std::string& path) {
  if (report.trials.empty()) throw std::invalid_argument("write_report_csv: empty report");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
  out << "metric,model,mean,std\n";
  for (const auto& m : kModels) {
    emit_row(out, report, "test_acc", m.name, [&m](const TrialRecord& t) { return m.get(t).test_acc; });
  }
  for (const auto& m : kModels) {
    emit_row(out, report, "target_acc", m.name, [&m](const TrialRecord& t) { return m.get(t).target_acc; });
  }
  for (const auto& m : kModels) {
    emit_row(out, report, "mia_acc", m.name, [&m](const TrialRecord& t) { return m.get(t).mia_acc; });
  }
  emit_row(out, report, "nta", "", [](const TrialRecord& t) { return t.nta_value; });
  emit_row(out, report, "nfs_target", "", [](const TrialRecord& t) { return t.nfs_target_value.value; });
  emit_row(out, report, "nfs_target_significant_fraction", "",
           [](const TrialRecord& t) { return t.nfs_target_value.significant ? 1.0 : 0.0; });
  emit_row(out, report, "nfs_mia", "", [](const TrialRecord& t) { return t.nfs_mia_value.value; });
  emit_row(out, report, "nfs_mia_significant_fraction", "",
           [](const TrialRecord& t) { return t.nfs_mia_value.significant ? 1.0 : 0.0; });
  if (report.has_backdoor) {
    for (const auto& m : kModels) {
      emit_row(out, report, "asr", m.name, [&m](const TrialRecord& t) { return m.get(t).asr.value_or(0.0); });
    }
    for (const auto& m : kModels) {
      emit_row(out, report, "backdoor_acc", m.name,
               [&m](const TrialRecord& t) { return m.get(t).backdoor_acc.value_or(0.0); });
    }
  }
}

void write_timing_csv(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_timing_csv: cannot open " + path);
  out << "trial,rtr,bee,train_seconds_original,train_seconds_benchmark,unlearn_seconds,single_epoch_seconds\n";
  for (size_t i = 0; i < report.trials.size(); ++i) {
    const auto& t = report.trials[i];
    out << i << ',' << format_double(t.rtr_value) << ',' << format_double(t.bee_value) << ','
        << format_double(t.train_seconds_original) << ',' << format_double(t.train_seconds_benchmark) << ','
        << format_double(t.unlearn_seconds) << ',' << format_double(t.single_epoch_seconds) << '\n';
  }
}

namespace {

nlohmann::json model_json(const ModelMetrics& m) {
  nlohmann::json j{{"test_acc", m.test_acc}, {"target_acc", m.target_acc}, {"mia_acc", m.mia_acc}};
  if (m.asr) j["asr"] = *m.asr;
  if (m.backdoor_acc) j["backdoor_acc"] = *m.backdoor_acc;
  return j;
}

nlohmann::json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

nlohmann::json aggregate_json(const MetricsReport& report, const Extract& extract) {
  const TrialStats s = stats_of(report, extract);
  return nlohmann::json{{"mean", nan_safe(s.mean)}, {"std", nan_safe(s.stddev)}, {"n", s.n}};
}

}  // namespace

void write_report_json(const MetricsReport& report, const std::string& path) {
  if (report.trials.empty()) throw std::invalid_argument("write_report_json: empty report");
  nlohmann::json j;
  j["trials"] = nlohmann::json::array();
  for (const auto& t : report.trials) {
    nlohmann::json tj;
    tj["trial_seed"] = t.trial_seed;
    tj["models"] = {{"original", model_json(t.original)},
                    {"benchmark", model_json(t.benchmark)},
                    {"reset", model_json(t.reset)},
                    {"unlearned", model_json(t.unlearned)}};
    tj["nta"] = nan_safe(t.nta_value);
    tj["nfs_target"] = {{"value", nan_safe(t.nfs_target_value.value)},
                        {"significant", t.nfs_target_value.significant}};
    tj["nfs_mia"] = {{"value", nan_safe(t.nfs_mia_value.value)}, {"significant", t.nfs_mia_value.significant}};
    tj["rtr"] = t.rtr_value;
    tj["bee"] = t.bee_value;
    tj["timing"] = {{"train_seconds_original", t.train_seconds_original},
                    {"train_seconds_benchmark", t.train_seconds_benchmark},
                    {"unlearn_seconds", t.unlearn_seconds},
                    {"single_epoch_seconds", t.single_epoch_seconds}};
    j["trials"].push_back(std::move(tj));
  }

  nlohmann::json agg;
  const char* model_names[] = {"original", "benchmark", "reset", "unlearned"};
  for (size_t m = 0; m < 4; ++m) {
    const auto& col = kModels[m];
    agg["test_acc"][model_names[m]] =
        aggregate_json(report, [&col](const TrialRecord& t) { return col.get(t).test_acc; });
    agg["target_acc"][model_names[m]] =
        aggregate_json(report, [&col](const TrialRecord& t) { return col.get(t).target_acc; });
    agg["mia_acc"][model_names[m]] =
        aggregate_json(report, [&col](const TrialRecord& t) { return col.get(t).mia_acc; });
    if (report.has_backdoor) {
      agg["asr"][model_names[m]] =
          aggregate_json(report, [&col](const TrialRecord& t) { return col.get(t).asr.value_or(0.0); });
      agg["backdoor_acc"][model_names[m]] =
          aggregate_json(report, [&col](const TrialRecord& t) { return col.get(t).backdoor_acc.value_or(0.0); });
    }
  }
  agg["nta"] = aggregate_json(report, [](const TrialRecord& t) { return t.nta_value; });
  agg["nfs_target"] = aggregate_json(report, [](const TrialRecord& t) { return t.nfs_target_value.value; });
  agg["nfs_mia"] = aggregate_json(report, [](const TrialRecord& t) { return t.nfs_mia_value.value; });
  agg["rtr"] = aggregate_json(report, [](const TrialRecord& t) { return t.rtr_value; });
  agg["bee"] = aggregate_json(report, [](const TrialRecord& t) { return t.bee_value; });
  j["aggregates"] = std::move(agg);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace fedunlearn
