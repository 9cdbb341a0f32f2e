#include "fedunlearn/fed.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "fedunlearn/rng.hpp"
#include "fedunlearn/train.hpp"

namespace fedunlearn {

bool DataAccessLog::touches_flagged(const std::vector<uint8_t>& flags) const {
  for (const auto& e : entries) {
    for (size_t i : e.samples) {
      if (i < flags.size() && flags[i]) return true;
    }
  }
  return false;
}

ParamSet fedavg_aggregate(const std::vector<ParamSet>& client_params, const std::vector<size_t>& sample_counts) {
  if (client_params.empty()) throw std::invalid_argument("fedavg_aggregate: no clients");
  if (client_params.size() != sample_counts.size()) {
    throw std::invalid_argument("fedavg_aggregate: counts do not match clients");
  }
  double total = 0.0;
  for (size_t n : sample_counts) total += static_cast<double>(n);
  if (total <= 0.0) throw std::invalid_argument("fedavg_aggregate: zero total samples");

  // When every client reports the same parameters the mean is that value;
  // returning it directly keeps the reduction exact.
  bool all_equal = true;
  for (size_t c = 1; c < client_params.size() && all_equal; ++c) {
    all_equal = bit_equal(client_params[c], client_params.front());
  }
  if (all_equal) return client_params.front();

  ParamSet global = zeros_like(client_params.front());
  for (size_t c = 0; c < client_params.size(); ++c) {
    if (!shape_congruent(global, client_params[c])) {
      throw std::invalid_argument("fedavg_aggregate: client parameter shapes differ");
    }
    const double w = static_cast<double>(sample_counts[c]) / total;
    for (size_t b = 0; b < global.blocks.size(); ++b) {
      auto& dst = global.blocks[b].tensor.values;
      const auto& src = client_params[c].blocks[b].tensor.values;
      for (size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    }
  }
  return global;
}

namespace {

std::vector<int> participating_clients(const Partition& partition, const FedConfig& cfg) {
  std::vector<int> clients;
  if (cfg.client_subset) {
    clients = *cfg.client_subset;
    std::sort(clients.begin(), clients.end());
    for (int c : clients) {
      if (c < 0 || c >= partition.n_clients()) {
        throw std::invalid_argument("fed_train: client " + std::to_string(c) + " not in partition");
      }
    }
  } else {
    for (int c = 0; c < partition.n_clients(); ++c) clients.push_back(c);
  }
  if (clients.empty()) throw std::invalid_argument("fed_train: empty client subset");
  return clients;
}

}  // namespace

FedTrainResult fed_train(const NetworkSpec& spec, const ParamSet& init, const Dataset& data,
                         const Partition& partition, const FedConfig& cfg, SampleFilter filter,
                         DataAccessLog* log) {
  if (cfg.rounds < 1) throw std::invalid_argument("fed_train: rounds must be >= 1");
  if (cfg.local_epochs < 1) throw std::invalid_argument("fed_train: local_epochs must be >= 1");
  const auto clients = participating_clients(partition, cfg);

  FedTrainResult result;
  result.params = init;
  const auto start = std::chrono::steady_clock::now();

  std::vector<ParamSet> locals;
  std::vector<size_t> counts;
  for (int round = 0; round < cfg.rounds; ++round) {
    locals.clear();
    counts.clear();
    for (int c : clients) {
      auto idx = partition.client_samples(c, filter);
      if (idx.empty()) {
        if (round == 0) result.warnings.push_back({c, "client has no samples after filtering; skipped"});
        continue;
      }
      if (log) log->entries.push_back({"fed_train", c, idx});
      TrainOptions opt;
      opt.epochs = cfg.local_epochs;
      opt.lr = cfg.lr;
      opt.momentum = cfg.momentum;
      opt.batch_size = cfg.batch_size;
      opt.seed = mix_seed(mix_seed(cfg.seed, static_cast<uint64_t>(round)), static_cast<uint64_t>(c));
      locals.push_back(sgd_train(spec, result.params, data, idx, opt));
      counts.push_back(idx.size());
    }
    if (locals.empty()) throw std::runtime_error("fed_train: no participating client has samples");
    result.params = fedavg_aggregate(locals, counts);
  }

  result.timing.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double measure_single_epoch(const NetworkSpec& spec, const ParamSet& params, const Dataset& data,
                            const Partition& partition, const FedConfig& cfg) {
  FedConfig one = cfg;
  one.rounds = 1;
  one.local_epochs = 1;
  const auto start = std::chrono::steady_clock::now();
  (void)fed_train(spec, params, data, partition, one, SampleFilter::RetainOnly);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return std::max(elapsed, 1e-9);
}

}  // namespace fedunlearn
