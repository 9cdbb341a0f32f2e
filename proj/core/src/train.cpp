#include "fedunlearn/train.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

#include "fedunlearn/rng.hpp"

namespace fedunlearn {

Tensor softmax_rows(const Tensor& logits) {
  Tensor p = logits;
  const int64_t n = logits.rows();
  const int64_t c = logits.row_width();
  for (int64_t i = 0; i < n; ++i) {
    double* row = &p.values[static_cast<size_t>(i * c)];
    double m = row[0];
    for (int64_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      row[j] = std::exp(row[j] - m);
      sum += row[j];
    }
    for (int64_t j = 0; j < c; ++j) row[j] /= sum;
  }
  return p;
}

LossGrad loss_and_grad(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch,
                       const std::vector<int>& labels) {
  const int64_t n = batch.rows();
  if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  if (static_cast<int64_t>(labels.size()) != n) throw std::invalid_argument("loss_and_grad: label count mismatch");
  for (int y : labels) {
    if (y < 0 || y >= spec.num_classes) {
      throw std::invalid_argument("loss_and_grad: label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(spec.num_classes) + ")");
    }
  }

  const ForwardTrace trace = forward_trace(spec, params, batch);
  const Tensor& logits = trace.logits();
  const int64_t c = spec.num_classes;

  LossGrad result;
  result.loss.per_sample_losses.resize(static_cast<size_t>(n));
  // delta = d(mean loss)/d(logits) = (softmax - onehot)/n
  Tensor delta({n, c});
  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double* z = &logits.values[static_cast<size_t>(i * c)];
    double* dz = &delta.values[static_cast<size_t>(i * c)];
    double m = z[0];
    for (int64_t j = 1; j < c; ++j) m = std::max(m, z[j]);
    double sum = 0.0;
    for (int64_t j = 0; j < c; ++j) sum += std::exp(z[j] - m);
    const double log_sum = std::log(sum) + m;
    const double loss_i = log_sum - z[labels[static_cast<size_t>(i)]];
    result.loss.per_sample_losses[static_cast<size_t>(i)] = loss_i;
    total += loss_i;
    for (int64_t j = 0; j < c; ++j) dz[j] = std::exp(z[j] - log_sum) / static_cast<double>(n);
    dz[labels[static_cast<size_t>(i)]] -= 1.0 / static_cast<double>(n);
  }
  result.loss.mean_loss = total / static_cast<double>(n);

  result.grad = zeros_like(params);

  // Lowest dense layer: no need to push deltas below it.
  int lowest_dense = -1;
  for (size_t l = 0; l < spec.layers.size(); ++l) {
    if (std::holds_alternative<DenseLayer>(spec.layers[l])) {
      lowest_dense = static_cast<int>(l);
      break;
    }
  }

  int dense_index = -1;
  for (const auto& layer : spec.layers) {
    if (std::holds_alternative<DenseLayer>(layer)) ++dense_index;
  }

  for (int l = static_cast<int>(spec.layers.size()) - 1; l >= lowest_dense; --l) {
    const Tensor& in = trace.activations[static_cast<size_t>(l)];
    if (const auto* d = std::get_if<DenseLayer>(&spec.layers[static_cast<size_t>(l)])) {
      const std::string base = "dense" + std::to_string(dense_index);
      const Tensor& w = params.find(base + ".weight")->tensor;
      Tensor& gw = result.grad.find(base + ".weight")->tensor;
      Tensor* gb = d->bias ? &result.grad.find(base + ".bias")->tensor : nullptr;

      for (int64_t smp = 0; smp < n; ++smp) {
        const double* x = &in.values[static_cast<size_t>(smp * d->in)];
        const double* dz = &delta.values[static_cast<size_t>(smp * d->out)];
        for (int64_t o = 0; o < d->out; ++o) {
          const double g = dz[o];
          double* gwr = &gw.values[static_cast<size_t>(o * d->in)];
          for (int64_t i = 0; i < d->in; ++i) gwr[i] += g * x[i];
          if (gb) gb->values[static_cast<size_t>(o)] += g;
        }
      }
      if (l > lowest_dense) {
        Tensor prev({n, d->in});
        for (int64_t smp = 0; smp < n; ++smp) {
          const double* dz = &delta.values[static_cast<size_t>(smp * d->out)];
          double* dp = &prev.values[static_cast<size_t>(smp * d->in)];
          for (int64_t o = 0; o < d->out; ++o) {
            const double g = dz[o];
            const double* wr = &w.values[static_cast<size_t>(o * d->in)];
            for (int64_t i = 0; i < d->in; ++i) dp[i] += g * wr[i];
          }
        }
        delta = std::move(prev);
      }
      --dense_index;
    } else if (std::holds_alternative<ReluLayer>(spec.layers[static_cast<size_t>(l)])) {
      for (size_t i = 0; i < delta.values.size(); ++i) {
        if (!(in.values[i] > 0.0)) delta.values[i] = 0.0;
      }
    }
    // flatten: identity
  }
  return result;
}

void SgdOptimizer::step(ParamSet& params, const ParamSet& grad) {
  if (!shape_congruent(params, grad)) throw std::invalid_argument("sgd: gradient not congruent with params");
  if (velocity_.empty()) {
    velocity_.resize(params.blocks.size());
    for (size_t b = 0; b < params.blocks.size(); ++b) {
      velocity_[b].assign(params.blocks[b].tensor.values.size(), 0.0);
    }
  }
  for (size_t b = 0; b < params.blocks.size(); ++b) {
    auto& p = params.blocks[b].tensor.values;
    const auto& g = grad.blocks[b].tensor.values;
    auto& v = velocity_[b];
    for (size_t i = 0; i < p.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      p[i] -= lr_ * v[i];
    }
  }
}

ParamSet sgd_train(const NetworkSpec& spec, ParamSet params, const Dataset& data,
                   std::span<const size_t> indices, const TrainOptions& opt) {
  if (opt.epochs < 0) throw std::invalid_argument("sgd_train: epochs must be >= 0");
  if (opt.epochs == 0) return params;
  if (indices.empty()) throw std::invalid_argument("sgd_train: empty dataset");
  if (opt.batch_size < 1) throw std::invalid_argument("sgd_train: batch_size must be >= 1");

  std::mt19937_64 rng(opt.seed);
  SgdOptimizer optimizer(opt.lr, opt.momentum);
  const size_t n = indices.size();
  std::vector<size_t> batch_idx;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto perm = random_permutation(rng, n);
    for (size_t start = 0; start < n; start += static_cast<size_t>(opt.batch_size)) {
      const size_t stop = std::min(n, start + static_cast<size_t>(opt.batch_size));
      batch_idx.clear();
      for (size_t k = start; k < stop; ++k) batch_idx.push_back(indices[perm[k]]);
      const Tensor batch = gather_rows(data.features, batch_idx);
      const std::vector<int> batch_labels = gather_labels(data.labels, batch_idx);
      const LossGrad lg = loss_and_grad(spec, params, batch, batch_labels);
      optimizer.step(params, lg.grad);
    }
  }
  return params;
}

ParamSet sgd_train(const NetworkSpec& spec, ParamSet params, const Dataset& data, const TrainOptions& opt) {
  const auto idx = all_indices(static_cast<size_t>(data.size()));
  return sgd_train(spec, std::move(params), data, idx, opt);
}

}  // namespace fedunlearn
