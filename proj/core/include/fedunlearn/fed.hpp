#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedunlearn/dataset.hpp"
#include "fedunlearn/network.hpp"
#include "fedunlearn/partition.hpp"

namespace fedunlearn {

struct FedConfig {
  int rounds = 1;
  int local_epochs = 1;
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  uint64_t seed = 0;
  std::optional<std::vector<int>> client_subset;  // empty optional: all clients
};

/// Wall-clock capture, all in seconds of a monotonic clock.
struct Timing {
  double train_seconds = 0.0;
  double unlearn_seconds = 0.0;
  double single_epoch_seconds = 0.0;
};

/// Record of which samples entered which client-local computation. The
/// orchestration layers thread an optional log through so tests can audit
/// that forget-flagged samples are never read during retain-only phases and
/// that no dataset read happens outside a client-local phase.
struct DataAccessLog {
  struct Entry {
    std::string phase;
    int client = -1;
    std::vector<size_t> samples;
  };
  std::vector<Entry> entries;

  bool touches_flagged(const std::vector<uint8_t>& flags) const;
};

struct ClientWarning {
  int client = -1;
  std::string message;
};

struct FedTrainResult {
  ParamSet params;
  Timing timing;
  std::vector<ClientWarning> warnings;
};

/// Sample-count-weighted mean of client parameter sets, reduced in the given
/// (fixed) order.
ParamSet fedavg_aggregate(const std::vector<ParamSet>& client_params, const std::vector<size_t>& sample_counts);

/// Simulated federation: every round, each participating client trains
/// local_epochs of SGD from the current global parameters on its (filtered)
/// samples; the server replaces the global parameters with the sample-count
/// weighted mean in ascending client order. Clients left with zero samples
/// after filtering are skipped with a warning record. Deterministic in
/// (cfg.seed, inputs); per-client batch orders come from
/// mix_seed(mix_seed(cfg.seed, round), client).
FedTrainResult fed_train(const NetworkSpec& spec, const ParamSet& init, const Dataset& data,
                         const Partition& partition, const FedConfig& cfg, SampleFilter filter,
                         DataAccessLog* log = nullptr);

/// Wall-clock seconds of one federated round (local_epochs = 1) over retain
/// samples, starting from `params`. The trained model is discarded.
double measure_single_epoch(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                            const Partition& partition, const FedConfig& cfg);

}  // namespace fedunlearn
