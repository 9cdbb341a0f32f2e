#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fedunlearn/experiment.hpp"
#include "fedunlearn/rng.hpp"
#include "fedunlearn/unlearn.hpp"

using namespace fedunlearn;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.dataset.kind = DatasetConfig::Kind::Synth;
  cfg.dataset.classes = 4;
  cfg.dataset.per_class = 50;
  cfg.dataset.dim = 16;
  cfg.dataset.spread = 0.05;
  cfg.n_clients = 3;
  cfg.rounds = 5;
  cfg.batch_size = 16;
  cfg.trials = 1;
  cfg.alpha_removal = 0.4;
  cfg.master_seed = 99;
  cfg.hidden = {16};
  cfg.output_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing applies defaults and validates fields") {
  const ExperimentConfig cfg = parse_config_json(R"({"master_seed": 5})");
  CHECK(cfg.trials == 20);
  CHECK(cfg.n_clients == 5);
  CHECK(cfg.split_ratio == 0.7);
  CHECK(cfg.alpha_removal == 0.4);
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.momentum == 0.9);
  CHECK(cfg.master_seed == 5);
  CHECK(std::holds_alternative<ForgetClient>(cfg.forget));
  CHECK_FALSE(cfg.backdoor.has_value());
}

TEST_CASE("config errors name the offending field") {
  auto expect_error = [](const std::string& json, const char* needle) {
    try {
      (void)parse_config_json(json);
      FAIL_CHECK("expected ConfigError for " << json);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(R"({"split_ratio": 1.5})", "split_ratio");
  expect_error(R"({"alpha_removal": -0.2})", "alpha_removal");
  expect_error(R"({"trials": 0})", "trials");
  expect_error(R"({"dataset": {"type": "idx"}})", "dataset.images");
  expect_error(R"({"dataset": {"type": "what"}})", "dataset.type");
  expect_error(R"({"partition": {"type": "preferential"}})", "partition.exclusive");
  expect_error(R"({"forget": {"type": "nothing"}})", "forget.type");
  expect_error(R"({"backdoor": {"poison_fraction": 0.0}})", "backdoor.poison_fraction");
  expect_error(R"({"unknown_key": 1})", "unknown_key");
  expect_error(R"({"dataset": {"type": "synth", "unknown": 2}})", "dataset.unknown");
  expect_error("not json", "invalid JSON");
}

TEST_CASE("canonical config JSON hashes are stable and sensitive") {
  const ExperimentConfig a = parse_config_json(R"({"master_seed": 5})");
  const ExperimentConfig b = parse_config_json(R"({"master_seed": 5, "trials": 20})");
  CHECK(config_canonical_json(a) == config_canonical_json(b));
  CHECK(config_hash(a) == config_hash(b));
  const ExperimentConfig c = parse_config_json(R"({"master_seed": 6})");
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("a one-trial run emits a complete report and manifest") {
  const fs::path out = fs::temp_directory_path() / "fedunlearn_run_complete";
  fs::remove_all(out);
  const ExperimentConfig cfg = tiny_config(out.string());
  const RunArtifacts artifacts = run_experiment(cfg);

  REQUIRE(artifacts.report.trials.size() == 1);
  CHECK(fs::exists(out / "report.csv"));
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "timing.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "scores_trial0.csv"));

  const std::string csv = slurp(out / "report.csv");
  for (const char* metric : {"test_acc", "target_acc", "mia_acc", "nta", "nfs_target", "nfs_mia"}) {
    CHECK(csv.find(metric) != std::string::npos);
  }
  for (const char* model : {"original", "benchmark", "reset", "unlearned"}) {
    CHECK(csv.find(model) != std::string::npos);
  }
  const auto& t = artifacts.report.trials[0];
  CHECK(t.rtr_value > 0.0);
  CHECK(t.bee_value > 0.0);
  CHECK(t.single_epoch_seconds > 0.0);
}

TEST_CASE("identical configs produce byte-identical metric reports") {
  const fs::path out1 = fs::temp_directory_path() / "fedunlearn_repro_1";
  const fs::path out2 = fs::temp_directory_path() / "fedunlearn_repro_2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  ExperimentConfig cfg = tiny_config(out1.string());
  cfg.trials = 2;
  (void)run_experiment(cfg);
  cfg.output_dir = out2.string();
  (void)run_experiment(cfg);

  CHECK(slurp(out1 / "report.csv") == slurp(out2 / "report.csv"));
  CHECK(slurp(out1 / "scores_trial0.csv") == slurp(out2 / "scores_trial0.csv"));
}

TEST_CASE("backdoor configs report asr and backdoor accuracy for all four models") {
  const fs::path out = fs::temp_directory_path() / "fedunlearn_run_backdoor";
  fs::remove_all(out);
  ExperimentConfig cfg = tiny_config(out.string());
  cfg.backdoor = BackdoorSpec{};
  cfg.backdoor->trigger_size = 2;
  cfg.backdoor->target_label = 3;
  const RunArtifacts artifacts = run_experiment(cfg);

  const auto& t = artifacts.report.trials[0];
  for (const ModelMetrics* m : {&t.original, &t.benchmark, &t.reset, &t.unlearned}) {
    CHECK(m->asr.has_value());
    CHECK(m->backdoor_acc.has_value());
  }
  const std::string csv = slurp(out / "report.csv");
  size_t asr_rows = 0;
  std::istringstream lines(csv);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("asr,", 0) == 0) ++asr_rows;
  }
  CHECK(asr_rows == 4);
}

TEST_CASE("sweeps emit one row per alpha and re-parse to the same floats") {
  const fs::path out = fs::temp_directory_path() / "fedunlearn_sweep";
  fs::remove_all(out);
  ExperimentConfig cfg = tiny_config(out.string());
  const std::vector<double> alphas = {0.0, 0.25, 0.5};
  const auto rows = run_sweep(cfg, alphas);
  REQUIRE(rows.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(rows[i].alpha == alphas[i]);

  // alpha 0: nothing reset, so the unlearned model must match the original
  // model's accuracy exactly; the delta row reflects theta_i vs theta_r.
  CHECK(fs::exists(out / "alpha_0" / "report.csv"));

  std::ifstream in(out / "sweep.csv");
  REQUIRE(in);
  std::string header;
  std::getline(in, header);
  CHECK(header == "alpha,delta_test_acc_vs_benchmark,mia_acc");
  for (size_t i = 0; i < 3; ++i) {
    std::string line;
    REQUIRE(std::getline(in, line));
    std::istringstream row(line);
    std::string a, d, m;
    std::getline(row, a, ',');
    std::getline(row, d, ',');
    std::getline(row, m, ',');
    CHECK(std::stod(a) == rows[i].alpha);
    CHECK(std::stod(d) == rows[i].delta_test_acc);
    CHECK(std::stod(m) == rows[i].mia_acc);
  }
}

TEST_CASE("audit quantiles match an independent sort-based computation") {
  const fs::path path = fs::temp_directory_path() / "fedunlearn_audit.csv";
  std::mt19937_64 rng(15);
  std::vector<double> scores(101);
  for (auto& v : scores) v = uniform_unit(rng);

  {
    std::ofstream out(path);
    out << "block,flat_index,tis,selected\n";
    for (size_t i = 0; i < scores.size(); ++i) {
      out << "blk," << i << ',' << format_double(scores[i]) << ',' << (i % 3 == 0 ? 1 : 0) << '\n';
    }
  }
  const auto audits = audit_scores_csv(path.string());
  REQUIRE(audits.size() == 1);
  CHECK(audits[0].size == 101);
  CHECK(audits[0].selected == 34);

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  };
  CHECK(audits[0].q0 == doctest::Approx(quantile(0.0)));
  CHECK(audits[0].q25 == doctest::Approx(quantile(0.25)));
  CHECK(audits[0].q50 == doctest::Approx(quantile(0.5)));
  CHECK(audits[0].q75 == doctest::Approx(quantile(0.75)));
  CHECK(audits[0].q100 == doctest::Approx(quantile(1.0)));

  const std::string rendered = render_audit(audits);
  CHECK(rendered.find("blk") != std::string::npos);
}

TEST_CASE("unlearn_pipeline touches samples only inside client-local phases") {
  const Dataset ds = synth_blobs(4, 30, 16, 0.05, 8);
  Partition part = partition_random(ds, 3, 9);
  part = mark_forget(ds, part, ForgetClient{0});
  NetworkSpec spec = mlp_spec(16, {8}, 4);
  const ParamSet snapshot = init_params(spec, 10);

  FedConfig cfg;
  cfg.rounds = 1;
  cfg.local_epochs = 1;
  cfg.seed = 11;
  const FedTrainResult trained = fed_train(spec, snapshot, ds, part, cfg, SampleFilter::All);

  DataAccessLog log;
  const UnlearnResult result = unlearn_pipeline(spec, trained.params, snapshot, ds, part, 0.4, cfg, 1e-12, &log);
  REQUIRE_FALSE(log.entries.empty());

  for (const auto& entry : log.entries) {
    // every read happens inside a client-local phase
    CHECK((entry.phase == "client_stats" || entry.phase == "trim_retrain"));
    REQUIRE(entry.client >= 0);
    REQUIRE(entry.client < part.n_clients());
    const auto& own = part.client_indices[static_cast<size_t>(entry.client)];
    const std::set<size_t> own_set(own.begin(), own.end());
    for (size_t i : entry.samples) CHECK(own_set.count(i) == 1);
    if (entry.phase == "trim_retrain") {
      for (size_t i : entry.samples) CHECK_FALSE(part.forget_flags[i]);
    }
  }
  CHECK_FALSE(bit_equal(result.theta_retrained, trained.params));
}

TEST_CASE("alpha zero leaves the trained model untouched through the pipeline") {
  const Dataset ds = synth_blobs(3, 20, 9, 0.05, 12);
  Partition part = partition_random(ds, 2, 13);
  part = mark_forget(ds, part, ForgetClient{1});
  NetworkSpec spec = mlp_spec(9, {6}, 3);
  const ParamSet snapshot = init_params(spec, 14);
  FedConfig cfg;
  cfg.rounds = 1;
  cfg.seed = 15;
  const FedTrainResult trained = fed_train(spec, snapshot, ds, part, cfg, SampleFilter::All);

  const UnlearnResult result = unlearn_pipeline(spec, trained.params, snapshot, ds, part, 0.0, cfg);
  CHECK(bit_equal(result.theta_reset, trained.params));
  CHECK(bit_equal(result.theta_retrained, trained.params));
  CHECK(result.mask.selected_count() == 0);
  CHECK(result.timing.unlearn_seconds > 0.0);
}

TEST_CASE("pipeline determinism under fixed seeds") {
  const Dataset ds = synth_blobs(3, 20, 9, 0.05, 16);
  Partition part = partition_random(ds, 2, 17);
  part = mark_forget(ds, part, ForgetClient{0});
  NetworkSpec spec = mlp_spec(9, {6}, 3);
  const ParamSet snapshot = init_params(spec, 18);
  FedConfig cfg;
  cfg.rounds = 1;
  cfg.seed = 19;
  const FedTrainResult trained = fed_train(spec, snapshot, ds, part, cfg, SampleFilter::All);

  const UnlearnResult a = unlearn_pipeline(spec, trained.params, snapshot, ds, part, 0.3, cfg);
  const UnlearnResult b = unlearn_pipeline(spec, trained.params, snapshot, ds, part, 0.3, cfg);
  CHECK(bit_equal(a.theta_reset, b.theta_reset));
  CHECK(bit_equal(a.theta_retrained, b.theta_retrained));
}
