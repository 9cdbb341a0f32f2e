// Command-line front end: run a configured experiment, sweep the removal
// fraction, or summarize an exported scores file.
//
//   fedunlearn run   --config cfg.json
//   fedunlearn sweep --config cfg.json --alphas 0,0.1,0.2,0.4,0.6
//   fedunlearn audit --scores out/scores_trial0.csv
//
// FEDUNLEARN_OUTPUT_DIR overrides the config's output_dir.
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedunlearn/experiment.hpp"
#include "fedunlearn/report.hpp"

namespace {

std::vector<double> parse_alphas(const std::string& csv) {
  std::vector<double> alphas;
  size_t start = 0;
  while (start <= csv.size()) {
    const size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        alphas.push_back(v);
      } catch (const std::exception&) {
        throw fedunlearn::ConfigError("alphas: cannot parse '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (alphas.empty()) throw fedunlearn::ConfigError("alphas: no values given");
  return alphas;
}

fedunlearn::ExperimentConfig load_config(const std::string& path) {
  auto cfg = fedunlearn::load_config_file(path);
  if (const char* env = std::getenv("FEDUNLEARN_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated unlearning laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string alphas_csv = "0,0.1,0.2,0.4,0.6";
  std::string scores_path;

  auto* run = app.add_subcommand("run", "run the configured experiment and write reports");
  run->add_option("--config", config_path, "JSON config file")->required();

  auto* sweep = app.add_subcommand("sweep", "run the experiment for each removal fraction");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--alphas", alphas_csv, "comma-separated removal fractions");

  auto* audit = app.add_subcommand("audit", "summarize an exported scores CSV");
  audit->add_option("--scores", scores_path, "scores CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = load_config(config_path);
      const auto artifacts = fedunlearn::run_experiment(cfg);
      std::cout << "wrote " << artifacts.files.size() << " files to " << cfg.output_dir << " ("
                << artifacts.report.trials.size() << " trials)\n";
    } else if (sweep->parsed()) {
      const auto cfg = load_config(config_path);
      const auto rows = fedunlearn::run_sweep(cfg, parse_alphas(alphas_csv));
      std::cout << "alpha,delta_test_acc_vs_benchmark,mia_acc\n";
      for (const auto& r : rows) {
        std::cout << fedunlearn::format_double(r.alpha) << ',' << fedunlearn::format_double(r.delta_test_acc)
                  << ',' << fedunlearn::format_double(r.mia_acc) << '\n';
      }
    } else if (audit->parsed()) {
      const auto audits = fedunlearn::audit_scores_csv(scores_path);
      std::cout << fedunlearn::render_audit(audits);
    }
  } catch (const fedunlearn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
