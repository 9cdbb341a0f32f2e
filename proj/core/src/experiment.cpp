#include "fedunlearn/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fedunlearn/fed.hpp"
#include "fedunlearn/rng.hpp"
#include "fedunlearn/unlearn.hpp"

namespace fedunlearn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

void reject_unknown_keys(const json& j, const std::string& scope, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      fail(scope.empty() ? key : scope + "." + key, "unknown field");
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, const std::string& scope, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(scope.empty() ? key : scope + "." + key, "wrong type");
  }
}

TriggerCorner parse_corner(const std::string& s) {
  if (s == "top-left") return TriggerCorner::TopLeft;
  if (s == "top-right") return TriggerCorner::TopRight;
  if (s == "bottom-left") return TriggerCorner::BottomLeft;
  if (s == "bottom-right") return TriggerCorner::BottomRight;
  fail("backdoor.corner", "expected one of top-left, top-right, bottom-left, bottom-right");
}

std::string corner_name(TriggerCorner c) {
  switch (c) {
    case TriggerCorner::TopLeft:
      return "top-left";
    case TriggerCorner::TopRight:
      return "top-right";
    case TriggerCorner::BottomLeft:
      return "bottom-left";
    case TriggerCorner::BottomRight:
      return "bottom-right";
  }
  return "top-right";
}

DatasetConfig parse_dataset(const json& j) {
  DatasetConfig d;
  if (!j.is_object()) fail("dataset", "expected an object");
  const std::string type = get_or<std::string>(j, "type", "dataset", "synth");
  if (type == "synth") {
    reject_unknown_keys(j, "dataset", {"type", "classes", "per_class", "dim", "spread", "border"});
    d.kind = DatasetConfig::Kind::Synth;
    d.classes = get_or<int>(j, "classes", "dataset", d.classes);
    d.per_class = get_or<int>(j, "per_class", "dataset", d.per_class);
    d.dim = get_or<int64_t>(j, "dim", "dataset", d.dim);
    d.spread = get_or<double>(j, "spread", "dataset", d.spread);
    d.border = get_or<int>(j, "border", "dataset", d.border);
    if (d.classes < 2) fail("dataset.classes", "must be >= 2");
    if (d.per_class < 1) fail("dataset.per_class", "must be >= 1");
    if (d.dim < 1) fail("dataset.dim", "must be >= 1");
    if (!(d.spread >= 0.0)) fail("dataset.spread", "must be >= 0");
    if (d.border < 0) fail("dataset.border", "must be >= 0");
  } else if (type == "idx") {
    reject_unknown_keys(j, "dataset", {"type", "images", "labels"});
    d.kind = DatasetConfig::Kind::Idx;
    d.images_path = get_or<std::string>(j, "images", "dataset", "");
    d.labels_path = get_or<std::string>(j, "labels", "dataset", "");
    if (d.images_path.empty()) fail("dataset.images", "required for idx datasets");
    if (d.labels_path.empty()) fail("dataset.labels", "required for idx datasets");
  } else {
    fail("dataset.type", "expected synth or idx");
  }
  return d;
}

PartitionConfig parse_partition(const json& j) {
  PartitionConfig p;
  if (!j.is_object()) fail("partition", "expected an object");
  const std::string type = get_or<std::string>(j, "type", "partition", "random");
  if (type == "random") {
    reject_unknown_keys(j, "partition", {"type"});
    p.kind = PartitionConfig::Kind::Random;
  } else if (type == "preferential") {
    reject_unknown_keys(j, "partition", {"type", "shared", "exclusive"});
    p.kind = PartitionConfig::Kind::Preferential;
    p.shared_classes = get_or<std::vector<int>>(j, "shared", "partition", {});
    p.exclusive_classes = get_or<std::vector<int>>(j, "exclusive", "partition", {});
    if (p.exclusive_classes.empty()) fail("partition.exclusive", "required for preferential partitions");
  } else {
    fail("partition.type", "expected random or preferential");
  }
  return p;
}

ForgetSelector parse_forget(const json& j) {
  if (!j.is_object()) fail("forget", "expected an object");
  const std::string type = get_or<std::string>(j, "type", "forget", "client");
  if (type == "client") {
    reject_unknown_keys(j, "forget", {"type", "id"});
    ForgetClient f;
    f.client = get_or<int>(j, "id", "forget", 0);
    if (f.client < 0) fail("forget.id", "must be >= 0");
    return f;
  }
  if (type == "class") {
    reject_unknown_keys(j, "forget", {"type", "label"});
    ForgetClass f;
    f.label = get_or<int>(j, "label", "forget", 0);
    if (f.label < 0) fail("forget.label", "must be >= 0");
    return f;
  }
  if (type == "samples") {
    reject_unknown_keys(j, "forget", {"type", "indices"});
    ForgetSamples f;
    f.indices = get_or<std::vector<size_t>>(j, "indices", "forget", {});
    return f;
  }
  fail("forget.type", "expected client, class or samples");
}

BackdoorSpec parse_backdoor(const json& j) {
  if (!j.is_object()) fail("backdoor", "expected an object");
  reject_unknown_keys(j, "backdoor",
                      {"trigger_size", "trigger_value", "corner", "target_label", "poisoned_client", "poison_fraction"});
  BackdoorSpec b;
  b.trigger_size = get_or<int>(j, "trigger_size", "backdoor", b.trigger_size);
  b.trigger_value = get_or<double>(j, "trigger_value", "backdoor", b.trigger_value);
  b.corner = parse_corner(get_or<std::string>(j, "corner", "backdoor", "top-right"));
  b.target_label = get_or<int>(j, "target_label", "backdoor", b.target_label);
  b.poisoned_client = get_or<int>(j, "poisoned_client", "backdoor", b.poisoned_client);
  b.poison_fraction = get_or<double>(j, "poison_fraction", "backdoor", b.poison_fraction);
  if (b.trigger_size < 1) fail("backdoor.trigger_size", "must be >= 1");
  if (!(b.trigger_value >= 0.0 && b.trigger_value <= 1.0)) fail("backdoor.trigger_value", "must be in [0,1]");
  if (b.target_label < 0) fail("backdoor.target_label", "must be >= 0");
  if (b.poisoned_client < 0) fail("backdoor.poisoned_client", "must be >= 0");
  if (!(b.poison_fraction > 0.0 && b.poison_fraction <= 1.0)) fail("backdoor.poison_fraction", "must be in (0,1]");
  return b;
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(j, "",
                      {"dataset", "split_ratio", "n_clients", "partition", "forget", "backdoor", "alpha_removal",
                       "rounds", "local_epochs", "lr", "momentum", "batch_size", "retrain_epochs", "retrain_aggregations", "eps_h",
                       "hidden", "trials", "master_seed", "output_dir", "export_scores"});

  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset = parse_dataset(j.at("dataset"));
  cfg.split_ratio = get_or<double>(j, "split_ratio", "", cfg.split_ratio);
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) fail("split_ratio", "must be in (0,1)");
  cfg.n_clients = get_or<int>(j, "n_clients", "", cfg.n_clients);
  if (cfg.n_clients < 1) fail("n_clients", "must be >= 1");
  if (j.contains("partition")) cfg.partition = parse_partition(j.at("partition"));
  if (j.contains("forget")) cfg.forget = parse_forget(j.at("forget"));
  if (j.contains("backdoor") && !j.at("backdoor").is_null()) cfg.backdoor = parse_backdoor(j.at("backdoor"));
  cfg.alpha_removal = get_or<double>(j, "alpha_removal", "", cfg.alpha_removal);
  if (!(cfg.alpha_removal >= 0.0 && cfg.alpha_removal <= 1.0)) fail("alpha_removal", "must be in [0,1]");
  cfg.rounds = get_or<int>(j, "rounds", "", cfg.rounds);
  if (cfg.rounds < 1) fail("rounds", "must be >= 1");
  cfg.local_epochs = get_or<int>(j, "local_epochs", "", cfg.local_epochs);
  if (cfg.local_epochs < 1) fail("local_epochs", "must be >= 1");
  cfg.lr = get_or<double>(j, "lr", "", cfg.lr);
  if (!(cfg.lr >= 0.0)) fail("lr", "must be >= 0");
  cfg.momentum = get_or<double>(j, "momentum", "", cfg.momentum);
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) fail("momentum", "must be in [0,1)");
  cfg.batch_size = get_or<int>(j, "batch_size", "", cfg.batch_size);
  if (cfg.batch_size < 1) fail("batch_size", "must be >= 1");
  cfg.retrain_epochs = get_or<int>(j, "retrain_epochs", "", cfg.retrain_epochs);
  if (cfg.retrain_epochs < 1) fail("retrain_epochs", "must be >= 1");
  cfg.retrain_aggregations = get_or<int>(j, "retrain_aggregations", "", cfg.retrain_aggregations);
  if (cfg.retrain_aggregations < 1) fail("retrain_aggregations", "must be >= 1");
  cfg.eps_h = get_or<double>(j, "eps_h", "", cfg.eps_h);
  if (!(cfg.eps_h >= 0.0)) fail("eps_h", "must be >= 0");
  cfg.hidden = get_or<std::vector<int64_t>>(j, "hidden", "", cfg.hidden);
  for (int64_t h : cfg.hidden) {
    if (h < 1) fail("hidden", "layer widths must be >= 1");
  }
  cfg.trials = get_or<int>(j, "trials", "", cfg.trials);
  if (cfg.trials < 1) fail("trials", "must be >= 1");
  cfg.master_seed = get_or<uint64_t>(j, "master_seed", "", cfg.master_seed);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "", cfg.output_dir);
  if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");
  cfg.export_scores = get_or<bool>(j, "export_scores", "", cfg.export_scores);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_canonical_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.dataset.kind == DatasetConfig::Kind::Synth) {
    j["dataset"] = {{"type", "synth"},
                    {"classes", cfg.dataset.classes},
                    {"per_class", cfg.dataset.per_class},
                    {"dim", cfg.dataset.dim},
                    {"spread", cfg.dataset.spread},
                    {"border", cfg.dataset.border}};
  } else {
    j["dataset"] = {{"type", "idx"}, {"images", cfg.dataset.images_path}, {"labels", cfg.dataset.labels_path}};
  }
  j["split_ratio"] = cfg.split_ratio;
  j["n_clients"] = cfg.n_clients;
  if (cfg.partition.kind == PartitionConfig::Kind::Random) {
    j["partition"] = {{"type", "random"}};
  } else {
    j["partition"] = {{"type", "preferential"},
                      {"shared", cfg.partition.shared_classes},
                      {"exclusive", cfg.partition.exclusive_classes}};
  }
  if (const auto* f = std::get_if<ForgetClient>(&cfg.forget)) {
    j["forget"] = {{"type", "client"}, {"id", f->client}};
  } else if (const auto* fc = std::get_if<ForgetClass>(&cfg.forget)) {
    j["forget"] = {{"type", "class"}, {"label", fc->label}};
  } else {
    j["forget"] = {{"type", "samples"}, {"indices", std::get<ForgetSamples>(cfg.forget).indices}};
  }
  if (cfg.backdoor) {
    j["backdoor"] = {{"trigger_size", cfg.backdoor->trigger_size},
                     {"trigger_value", cfg.backdoor->trigger_value},
                     {"corner", corner_name(cfg.backdoor->corner)},
                     {"target_label", cfg.backdoor->target_label},
                     {"poisoned_client", cfg.backdoor->poisoned_client},
                     {"poison_fraction", cfg.backdoor->poison_fraction}};
  } else {
    j["backdoor"] = nullptr;
  }
  j["alpha_removal"] = cfg.alpha_removal;
  j["rounds"] = cfg.rounds;
  j["local_epochs"] = cfg.local_epochs;
  j["lr"] = cfg.lr;
  j["momentum"] = cfg.momentum;
  j["batch_size"] = cfg.batch_size;
  j["retrain_epochs"] = cfg.retrain_epochs;
  j["retrain_aggregations"] = cfg.retrain_aggregations;
  j["eps_h"] = cfg.eps_h;
  j["hidden"] = cfg.hidden;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  j["export_scores"] = cfg.export_scores;
  return j.dump();
}

uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string canon = config_canonical_json(cfg);
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

// Sub-seed stream indices within a trial.
enum SeedStream : uint64_t {
  kSeedData = 1,
  kSeedSplit = 2,
  kSeedPartition = 3,
  kSeedInit = 4,
  kSeedFed = 5,
  kSeedBenchInit = 6,
  kSeedBenchFed = 7,
  kSeedMia = 8,
  kSeedUnlearn = 9,
  kSeedPoison = 10,
};

Dataset build_dataset(const ExperimentConfig& cfg, uint64_t data_seed) {
  if (cfg.dataset.kind == DatasetConfig::Kind::Synth) {
    return synth_blobs(cfg.dataset.classes, cfg.dataset.per_class, cfg.dataset.dim, cfg.dataset.spread,
                       data_seed, cfg.dataset.border);
  }
  return load_idx(cfg.dataset.images_path, cfg.dataset.labels_path);
}

Partition build_partition(const ExperimentConfig& cfg, const Dataset& train, uint64_t seed) {
  if (cfg.partition.kind == PartitionConfig::Kind::Random) {
    return partition_random(train, cfg.n_clients, seed);
  }
  return partition_preferential(train, cfg.n_clients, cfg.partition.shared_classes,
                                cfg.partition.exclusive_classes, seed);
}

ModelMetrics evaluate_model(const ExperimentConfig& cfg, const NetworkSpec& spec, const ParamSet& params,
                            const Dataset& train, const Dataset& test, const std::vector<size_t>& target_idx,
                            uint64_t mia_seed) {
  ModelMetrics m;
  m.test_acc = accuracy(spec, params, test);
  m.target_acc = accuracy_on(spec, params, train, target_idx);
  m.mia_acc = mia_accuracy(spec, params, train, target_idx, test, mia_seed);
  if (cfg.backdoor) {
    m.asr = asr(spec, params, test, *cfg.backdoor);
    m.backdoor_acc = backdoor_accuracy(spec, params, test, *cfg.backdoor);
  }
  return m;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  RunArtifacts artifacts;
  artifacts.report.has_backdoor = cfg.backdoor.has_value();
  fs::create_directories(cfg.output_dir);

  for (int trial = 0; trial < cfg.trials; ++trial) {
    const uint64_t trial_seed = mix_seed(cfg.master_seed, static_cast<uint64_t>(trial));
    artifacts.trial_seeds.push_back(trial_seed);

    const Dataset full = build_dataset(cfg, mix_seed(trial_seed, kSeedData));
    auto [train, test] = split_train_test(full, cfg.split_ratio, mix_seed(trial_seed, kSeedSplit));
    Partition partition = build_partition(cfg, train, mix_seed(trial_seed, kSeedPartition));
    if (cfg.backdoor) train = poison(train, partition, *cfg.backdoor, mix_seed(trial_seed, kSeedPoison));
    partition = mark_forget(train, std::move(partition), cfg.forget);
    const std::vector<size_t> target_idx = partition.target_indices();
    if (target_idx.empty()) throw std::runtime_error("run: forget selector matched no assigned sample");

    const NetworkSpec spec = mlp_spec(train.dim(), cfg.hidden, train.class_count);

    FedConfig fed_cfg;
    fed_cfg.rounds = cfg.rounds;
    fed_cfg.local_epochs = cfg.local_epochs;
    fed_cfg.lr = cfg.lr;
    fed_cfg.momentum = cfg.momentum;
    fed_cfg.batch_size = cfg.batch_size;

    // Original model.
    const ParamSet init_snapshot = init_params(spec, mix_seed(trial_seed, kSeedInit));
    fed_cfg.seed = mix_seed(trial_seed, kSeedFed);
    const FedTrainResult original = fed_train(spec, init_snapshot, train, partition, fed_cfg, SampleFilter::All);

    // Benchmark: retrained from a fresh init on retain data only.
    const ParamSet bench_init = init_params(spec, mix_seed(trial_seed, kSeedBenchInit));
    fed_cfg.seed = mix_seed(trial_seed, kSeedBenchFed);
    const FedTrainResult benchmark =
        fed_train(spec, bench_init, train, partition, fed_cfg, SampleFilter::RetainOnly);

    // Unlearning.
    FedConfig retrain_cfg = fed_cfg;
    retrain_cfg.rounds = cfg.retrain_aggregations;
    retrain_cfg.local_epochs = cfg.retrain_epochs;
    retrain_cfg.seed = mix_seed(trial_seed, kSeedUnlearn);
    const UnlearnResult unlearned = unlearn_pipeline(spec, original.params, init_snapshot, train, partition,
                                                     cfg.alpha_removal, retrain_cfg, cfg.eps_h);

    const double single_epoch = measure_single_epoch(spec, bench_init, train, partition, fed_cfg);

    if (cfg.export_scores && trial == 0) {
      const std::string scores_path = (fs::path(cfg.output_dir) / "scores_trial0.csv").string();
      export_scores_csv(unlearned.scores, unlearned.mask, scores_path);
      artifacts.files.push_back("scores_trial0.csv");
    }

    const uint64_t mia_seed = mix_seed(trial_seed, kSeedMia);
    TrialRecord rec;
    rec.trial_seed = trial_seed;
    rec.original = evaluate_model(cfg, spec, original.params, train, test, target_idx, mia_seed);
    rec.benchmark = evaluate_model(cfg, spec, benchmark.params, train, test, target_idx, mia_seed);
    rec.reset = evaluate_model(cfg, spec, unlearned.theta_reset, train, test, target_idx, mia_seed);
    rec.unlearned = evaluate_model(cfg, spec, unlearned.theta_retrained, train, test, target_idx, mia_seed);
    rec.nta_value = nta(rec.unlearned.test_acc, rec.benchmark.test_acc);
    rec.nfs_target_value = nfs_target(rec.unlearned.target_acc, rec.benchmark.target_acc, rec.original.target_acc);
    rec.nfs_mia_value = nfs_mia(rec.unlearned.mia_acc, rec.benchmark.mia_acc, rec.original.mia_acc);

    Timing timing;
    timing.train_seconds = benchmark.timing.train_seconds;
    timing.unlearn_seconds = unlearned.timing.unlearn_seconds;
    timing.single_epoch_seconds = single_epoch;
    rec.rtr_value = rtr(timing);
    rec.bee_value = bee(timing);
    rec.train_seconds_original = original.timing.train_seconds;
    rec.train_seconds_benchmark = benchmark.timing.train_seconds;
    rec.unlearn_seconds = unlearned.timing.unlearn_seconds;
    rec.single_epoch_seconds = single_epoch;
    artifacts.report.trials.push_back(std::move(rec));
  }

  const fs::path out(cfg.output_dir);
  write_report_csv(artifacts.report, (out / "report.csv").string());
  artifacts.files.push_back("report.csv");
  write_timing_csv(artifacts.report, (out / "timing.csv").string());
  artifacts.files.push_back("timing.csv");
  write_report_json(artifacts.report, (out / "report.json").string());
  artifacts.files.push_back("report.json");

  json manifest;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  manifest["config_hash"] = hash_hex;
  manifest["config"] = json::parse(config_canonical_json(cfg));
  manifest["trial_seeds"] = artifacts.trial_seeds;
  manifest["version"] = "0.1.0";
  std::sort(artifacts.files.begin(), artifacts.files.end());
  manifest["artifacts"] = artifacts.files;
  std::ofstream mf(out / "manifest.json");
  if (!mf) throw std::runtime_error("run: cannot write manifest.json");
  mf << manifest.dump(2) << '\n';
  artifacts.files.push_back("manifest.json");
  return artifacts;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<double>& alphas) {
  namespace fs = std::filesystem;
  if (alphas.empty()) throw ConfigError("sweep: empty alpha list");
  fs::create_directories(cfg.output_dir);
  std::vector<SweepRow> rows;
  for (double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("sweep: alpha must be in [0,1]");
    ExperimentConfig sub = cfg;
    sub.alpha_removal = alpha;
    sub.output_dir = (fs::path(cfg.output_dir) / ("alpha_" + format_double(alpha))).string();
    const RunArtifacts artifacts = run_experiment(sub);

    SweepRow row;
    row.alpha = alpha;
    std::vector<double> deltas;
    std::vector<double> mias;
    for (const auto& t : artifacts.report.trials) {
      deltas.push_back(t.unlearned.test_acc - t.benchmark.test_acc);
      mias.push_back(t.unlearned.mia_acc);
    }
    row.delta_test_acc = trial_stats(deltas).mean;
    row.mia_acc = trial_stats(mias).mean;
    rows.push_back(row);
  }

  std::ofstream out(fs::path(cfg.output_dir) / "sweep.csv");
  if (!out) throw std::runtime_error("sweep: cannot write sweep.csv");
  out << "alpha,delta_test_acc_vs_benchmark,mia_acc\n";
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << format_double(r.delta_test_acc) << ',' << format_double(r.mia_acc)
        << '\n';
  }
  return rows;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

std::vector<BlockAudit> audit_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("audit: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("audit: empty scores file " + path);
  if (line != "block,flat_index,tis,selected") throw std::runtime_error("audit: unexpected header: " + line);

  std::vector<std::string> order;
  struct Acc {
    std::vector<double> scores;
    size_t selected = 0;
  };
  std::map<std::string, Acc> by_block;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string block, idx_s, tis_s, sel_s;
    if (!std::getline(row, block, ',') || !std::getline(row, idx_s, ',') || !std::getline(row, tis_s, ',') ||
        !std::getline(row, sel_s, ',')) {
      throw std::runtime_error("audit: malformed row at line " + std::to_string(line_no));
    }
    double tis = 0.0;
    const auto res = std::from_chars(tis_s.data(), tis_s.data() + tis_s.size(), tis);
    if (res.ec != std::errc{}) throw std::runtime_error("audit: bad score at line " + std::to_string(line_no));
    auto [it, inserted] = by_block.try_emplace(block);
    if (inserted) order.push_back(block);
    it->second.scores.push_back(tis);
    if (sel_s == "1") ++it->second.selected;
  }

  std::vector<BlockAudit> audits;
  for (const auto& name : order) {
    auto& acc = by_block[name];
    std::sort(acc.scores.begin(), acc.scores.end());
    BlockAudit a;
    a.name = name;
    a.size = acc.scores.size();
    a.selected = acc.selected;
    a.q0 = quantile_sorted(acc.scores, 0.0);
    a.q25 = quantile_sorted(acc.scores, 0.25);
    a.q50 = quantile_sorted(acc.scores, 0.5);
    a.q75 = quantile_sorted(acc.scores, 0.75);
    a.q100 = quantile_sorted(acc.scores, 1.0);
    audits.push_back(std::move(a));
  }
  return audits;
}

std::string render_audit(const std::vector<BlockAudit>& audits) {
  std::ostringstream os;
  os << "block,size,selected,q0,q25,q50,q75,q100\n";
  for (const auto& a : audits) {
    os << a.name << ',' << a.size << ',' << a.selected << ',' << format_double(a.q0) << ',' << format_double(a.q25)
       << ',' << format_double(a.q50) << ',' << format_double(a.q75) << ',' << format_double(a.q100) << '\n';
  }
  return os.str();
}

}  // namespace fedunlearn
