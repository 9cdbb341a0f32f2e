#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedunlearn/backdoor.hpp"
#include "fedunlearn/dataset.hpp"
#include "fedunlearn/fed.hpp"
#include "fedunlearn/network.hpp"

namespace fedunlearn {

/// Argmax predictions; ties resolved toward the lowest class index.
std::vector<int> predict_labels(const NetworkSpec& spec, const ParamSet& params, const Tensor& features);

/// Fraction of argmax-correct predictions.
double accuracy(const NetworkSpec& spec, const ParamSet& params, const Dataset& ds);
double accuracy_on(const NetworkSpec& spec, const ParamSet& params, const Dataset& ds,
                   std::span<const size_t> indices);

/// Normalized test accuracy acc_u / acc_r; may exceed 1. Throws when
/// acc_r == 0.
double nta(double acc_u, double acc_r);

/// Normalized forgetting score 1 - |u - r| / |i - r| with a significance flag;
/// an insignificant denominator means the score carries no information.
struct NfsResult {
  double value = 0.0;
  bool significant = true;
};

/// Significance threshold 1e-9 on |acc_i - acc_r| (degenerate denominator).
NfsResult nfs_target(double acc_u_target, double acc_r_target, double acc_i_target);

/// Significance threshold 0.02 on |mia_i - mia_r|.
NfsResult nfs_mia(double mia_u, double mia_r, double mia_i);

/// Per-sample attack features observed from the model.
struct MiaFeature {
  double loss = 0.0;        // cross-entropy of the true label
  double confidence = 0.0;  // max softmax probability
};

std::vector<MiaFeature> mia_features(const NetworkSpec& spec, const ParamSet& params, const Dataset& ds,
                                     std::span<const size_t> indices);

/// Membership-inference accuracy of a logistic attacker on (loss, confidence)
/// features: balanced seeded subsample, per-side 70/30 train/eval split,
/// feature standardization from the train split, full-batch gradient descent
/// with 200 iterations at learning rate 0.1. Throws when either side has
/// fewer than 10 samples.
double mia_accuracy_from_features(const std::vector<MiaFeature>& members,
                                  const std::vector<MiaFeature>& non_members, uint64_t seed);

/// Members are the selected rows of target_data; non-members the whole
/// test_data.
double mia_accuracy(const NetworkSpec& spec, const ParamSet& params, const Dataset& target_data,
                    std::span<const size_t> target_indices, const Dataset& test_data, uint64_t seed);

/// Attack success rate: trigger every test image and score prediction ==
/// target label over the images whose true label differs from the target
/// (consistent with backdoor_accuracy's denominator).
double asr(const NetworkSpec& spec, const ParamSet& params, const Dataset& test_set, const BackdoorSpec& bd);

/// Accuracy on triggered images with true label != target, scored against the
/// true labels.
double backdoor_accuracy(const NetworkSpec& spec, const ParamSet& params, const Dataset& test_set,
                         const BackdoorSpec& bd);

/// Retraining-time / unlearning-time ratio; throws on a zero denominator.
double rtr(const Timing& timing);
/// Unlearning-time / single-epoch-time ratio; throws on a zero denominator.
double bee(const Timing& timing);

struct TrialStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1); 0 when n == 1
  size_t n = 0;
};
TrialStats trial_stats(std::span<const double> values);

}  // namespace fedunlearn
