#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedunlearn/dataset.hpp"
#include "fedunlearn/network.hpp"

namespace fedunlearn {

struct LossValue {
  double mean_loss = 0.0;
  std::vector<double> per_sample_losses;
};

struct LossGrad {
  LossValue loss;
  ParamSet grad;  // gradient of the mean loss, shape-congruent with params
};

/// Row-wise softmax of logits.
Tensor softmax_rows(const Tensor& logits);

/// Mean softmax cross-entropy over the batch plus its gradient w.r.t. every
/// parameter element. Throws on an empty batch or a label outside
/// [0, num_classes).
LossGrad loss_and_grad(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch,
                       const std::vector<int>& labels);

/// SGD with momentum: v <- momentum*v + g; p <- p - lr*v. Velocity is owned
/// by the optimizer so a fresh instance starts cold.
class SgdOptimizer {
 public:
  SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
  void step(ParamSet& params, const ParamSet& grad);

 private:
  double lr_;
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

struct TrainOptions {
  int epochs = 1;
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  uint64_t seed = 0;
};

/// Mini-batch SGD on softmax cross-entropy. Batch order is a seeded
/// permutation redrawn each epoch; the last partial batch is kept.
/// epochs == 0 returns params unchanged. Deterministic in all arguments.
ParamSet sgd_train(const NetworkSpec& spec, ParamSet params, const Dataset& data,
                   std::span<const size_t> indices, const TrainOptions& opt);
ParamSet sgd_train(const NetworkSpec& spec, ParamSet params, const Dataset& data, const TrainOptions& opt);

}  // namespace fedunlearn
