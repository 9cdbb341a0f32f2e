#include "fedunlearn/trim.hpp"

#include <stdexcept>

#include "fedunlearn/rng.hpp"
#include "fedunlearn/train.hpp"

namespace fedunlearn {

size_t TrimState::trainable_count() const {
  size_t n = 0;
  for (const auto& b : blocks) n += b.trainable.size();
  return n;
}

ParamSet TrimState::reconstruct() const {
  ParamSet params;
  params.blocks.reserve(blocks.size());
  for (const auto& b : blocks) {
    ParamSet::Block out{b.name, b.buffer};
    for (size_t k = 0; k < b.indices.size(); ++k) {
      out.tensor.values[static_cast<size_t>(b.indices[k])] = b.trainable[k];
    }
    params.blocks.push_back(std::move(out));
  }
  return params;
}

TrimState trim_initialize(const ParamSet& base, const ResetMask& mask) {
  if (mask.blocks.size() != base.blocks.size()) {
    throw std::invalid_argument("trim_initialize: mask is not congruent with base parameters");
  }
  TrimState trim;
  trim.blocks.reserve(base.blocks.size());
  for (size_t b = 0; b < base.blocks.size(); ++b) {
    const auto& mb = mask.blocks[b];
    const auto& pb = base.blocks[b];
    if (mb.name != pb.name || mb.selected.size() != pb.tensor.values.size()) {
      throw std::invalid_argument("trim_initialize: mask block " + mb.name + " is not congruent");
    }
    TrimState::Block tb;
    tb.name = pb.name;
    tb.buffer = pb.tensor;
    for (size_t i = 0; i < mb.selected.size(); ++i) {
      if (mb.selected[i]) {
        tb.indices.push_back(static_cast<int64_t>(i));
        tb.trainable.push_back(pb.tensor.values[i]);
        tb.buffer.values[i] = 0.0;
      }
    }
    trim.blocks.push_back(std::move(tb));
  }
  return trim;
}

Tensor trim_forward(const TrimState& trim, const NetworkSpec& spec, const Tensor& batch) {
  return forward(spec, trim.reconstruct(), batch);
}

namespace {

/// Mini-batch SGD over the trainable vectors only; gradients are taken from
/// the full-model gradient at the masked positions, which equals the gradient
/// with all other parameters frozen.
std::vector<std::vector<double>> trim_local_train(const TrimState& global, const NetworkSpec& spec,
                                                  const Dataset& data, const std::vector<size_t>& indices,
                                                  const TrainOptions& opt) {
  std::vector<std::vector<double>> trainable;
  trainable.reserve(global.blocks.size());
  for (const auto& b : global.blocks) trainable.push_back(b.trainable);

  std::vector<std::vector<double>> velocity;
  velocity.reserve(global.blocks.size());
  for (const auto& b : global.blocks) velocity.emplace_back(b.trainable.size(), 0.0);

  TrimState live = global;
  std::mt19937_64 rng(opt.seed);
  const size_t n = indices.size();
  std::vector<size_t> batch_idx;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto perm = random_permutation(rng, n);
    for (size_t start = 0; start < n; start += static_cast<size_t>(opt.batch_size)) {
      const size_t stop = std::min(n, start + static_cast<size_t>(opt.batch_size));
      batch_idx.clear();
      for (size_t k = start; k < stop; ++k) batch_idx.push_back(indices[perm[k]]);

      for (size_t b = 0; b < live.blocks.size(); ++b) live.blocks[b].trainable = trainable[b];
      const ParamSet params = live.reconstruct();
      const Tensor batch = gather_rows(data.features, batch_idx);
      const std::vector<int> labels = gather_labels(data.labels, batch_idx);
      const LossGrad lg = loss_and_grad(spec, params, batch, labels);

      for (size_t b = 0; b < live.blocks.size(); ++b) {
        const auto& gblock = lg.grad.blocks[b].tensor.values;
        const auto& idx = live.blocks[b].indices;
        auto& v = velocity[b];
        auto& t = trainable[b];
        for (size_t k = 0; k < idx.size(); ++k) {
          v[k] = opt.momentum * v[k] + gblock[static_cast<size_t>(idx[k])];
          t[k] -= opt.lr * v[k];
        }
      }
    }
  }
  return trainable;
}

}  // namespace

ParamSet trim_retrain(TrimState trim, const NetworkSpec& spec, const Dataset& data, const Partition& partition,
                      const FedConfig& cfg, DataAccessLog* log, std::vector<ClientWarning>* warnings) {
  if (cfg.local_epochs < 1) throw std::invalid_argument("trim_retrain: local_epochs must be >= 1");
  if (cfg.rounds < 1) throw std::invalid_argument("trim_retrain: rounds must be >= 1");
  if (trim.trainable_count() == 0) return trim.reconstruct();  // nothing to update

  // Each epoch touches every retain sample exactly once. cfg.rounds sets the
  // aggregation cadence inside an epoch: every client's (shuffled) retain
  // samples are split into cfg.rounds chunks and the trainable vectors are
  // re-averaged after each chunk, which curbs client drift on non-IID data.
  struct ClientPlan {
    int client = -1;
    std::vector<size_t> shuffled;
  };
  std::vector<ClientPlan> plans;
  for (int c = 0; c < partition.n_clients(); ++c) {
    auto idx = partition.client_samples(c, SampleFilter::RetainOnly);
    if (idx.empty()) {
      if (warnings) warnings->push_back({c, "client has no retain samples; skipped in retraining"});
      continue;
    }
    if (log) log->entries.push_back({"trim_retrain", c, idx});
    plans.push_back({c, std::move(idx)});
  }
  if (plans.empty()) throw std::runtime_error("trim_retrain: empty retain set across all clients");
  const auto subrounds = static_cast<size_t>(cfg.rounds);

  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    for (auto& plan : plans) {
      std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, static_cast<uint64_t>(epoch)),
                                   static_cast<uint64_t>(plan.client)));
      const auto perm = random_permutation(rng, plan.shuffled.size());
      std::vector<size_t> shuffled(plan.shuffled.size());
      const auto retain = partition.client_samples(plan.client, SampleFilter::RetainOnly);
      for (size_t k = 0; k < perm.size(); ++k) shuffled[k] = retain[perm[k]];
      plan.shuffled = std::move(shuffled);
    }
    for (size_t sub = 0; sub < subrounds; ++sub) {
      std::vector<std::vector<std::vector<double>>> locals;
      std::vector<size_t> counts;
      for (const auto& plan : plans) {
        const size_t n = plan.shuffled.size();
        const size_t begin = sub * n / subrounds;
        const size_t end = (sub + 1) * n / subrounds;
        if (begin == end) continue;
        const std::vector<size_t> chunk(plan.shuffled.begin() + static_cast<ptrdiff_t>(begin),
                                        plan.shuffled.begin() + static_cast<ptrdiff_t>(end));
        TrainOptions opt;
        opt.epochs = 1;
        opt.lr = cfg.lr;
        opt.momentum = cfg.momentum;
        opt.batch_size = cfg.batch_size;
        opt.seed = mix_seed(mix_seed(cfg.seed, 0xC0FFEE + sub), static_cast<uint64_t>(plan.client));
        locals.push_back(trim_local_train(trim, spec, data, chunk, opt));
        counts.push_back(chunk.size());
      }
      if (locals.empty()) continue;

      // Exact fast path when every client reports identical trainable vectors
      // (notably lr = 0).
      bool all_equal = true;
      for (size_t c = 1; c < locals.size() && all_equal; ++c) all_equal = locals[c] == locals.front();
      if (all_equal) {
        for (size_t b = 0; b < trim.blocks.size(); ++b) trim.blocks[b].trainable = locals.front()[b];
        continue;
      }

      double total = 0.0;
      for (size_t n : counts) total += static_cast<double>(n);
      for (size_t b = 0; b < trim.blocks.size(); ++b) {
        auto& t = trim.blocks[b].trainable;
        std::fill(t.begin(), t.end(), 0.0);
        for (size_t c = 0; c < locals.size(); ++c) {
          const double w = static_cast<double>(counts[c]) / total;
          for (size_t k = 0; k < t.size(); ++k) t[k] += w * locals[c][b][k];
        }
      }
    }
  }
  return trim.reconstruct();
}

}  // namespace fedunlearn
