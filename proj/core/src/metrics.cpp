#include "fedunlearn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fedunlearn/rng.hpp"
#include "fedunlearn/train.hpp"

namespace fedunlearn {

std::vector<int> predict_labels(const NetworkSpec& spec, const ParamSet& params, const Tensor& features) {
  const Tensor logits = forward(spec, params, features);
  const int64_t n = logits.rows();
  const int64_t c = logits.row_width();
  std::vector<int> preds(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double* row = &logits.values[static_cast<size_t>(i * c)];
    int best = 0;
    for (int64_t j = 1; j < c; ++j) {
      if (row[j] > row[best]) best = static_cast<int>(j);
    }
    preds[static_cast<size_t>(i)] = best;
  }
  return preds;
}

double accuracy(const NetworkSpec& spec, const ParamSet& params, const Dataset& ds) {
  const auto idx = all_indices(static_cast<size_t>(ds.size()));
  return accuracy_on(spec, params, ds, idx);
}

double accuracy_on(const NetworkSpec& spec, const ParamSet& params, const Dataset& ds,
                   std::span<const size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("accuracy: empty sample set");
  const Tensor features = gather_rows(ds.features, indices);
  const auto preds = predict_labels(spec, params, features);
  size_t correct = 0;
  for (size_t i = 0; i < indices.size(); ++i) {
    if (preds[i] == ds.labels[indices[i]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double nta(double acc_u, double acc_r) {
  if (acc_r == 0.0) throw std::runtime_error("nta: benchmark accuracy is zero, metric undefined");
  return acc_u / acc_r;
}

namespace {

NfsResult nfs_generic(double u, double r, double i, double significance_threshold) {
  NfsResult out;
  const double numer = std::fabs(u - r);
  const double denom = std::fabs(i - r);
  out.significant = denom >= significance_threshold;
  if (numer == 0.0) {
    out.value = 1.0;
  } else if (denom == 0.0) {
    out.value = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.value = 1.0 - numer / denom;
  }
  return out;
}

}  // namespace

NfsResult nfs_target(double acc_u_target, double acc_r_target, double acc_i_target) {
  return nfs_generic(acc_u_target, acc_r_target, acc_i_target, 1e-9);
}

NfsResult nfs_mia(double mia_u, double mia_r, double mia_i) { return nfs_generic(mia_u, mia_r, mia_i, 0.02); }

std::vector<MiaFeature> mia_features(const NetworkSpec& spec, const ParamSet& params, const Dataset& ds,
                                     std::span<const size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("mia_features: empty sample set");
  const Tensor batch = gather_rows(ds.features, indices);
  const Tensor probs = softmax_rows(forward(spec, params, batch));
  const int64_t c = probs.row_width();
  std::vector<MiaFeature> out(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    const double* row = &probs.values[i * static_cast<size_t>(c)];
    const int y = ds.labels[indices[i]];
    out[i].loss = -std::log(std::max(row[y], 1e-300));
    out[i].confidence = *std::max_element(row, row + c);
  }
  return out;
}

namespace {

struct LogisticModel {
  double w_loss = 0.0;
  double w_conf = 0.0;
  double bias = 0.0;
  double mean_loss = 0.0, std_loss = 1.0;
  double mean_conf = 0.0, std_conf = 1.0;

  double prob(const MiaFeature& f) const {
    const double x1 = (f.loss - mean_loss) / std_loss;
    const double x2 = (f.confidence - mean_conf) / std_conf;
    return 1.0 / (1.0 + std::exp(-(w_loss * x1 + w_conf * x2 + bias)));
  }
};

}  // namespace

double mia_accuracy_from_features(const std::vector<MiaFeature>& members,
                                  const std::vector<MiaFeature>& non_members, uint64_t seed) {
  const size_t m = std::min(members.size(), non_members.size());
  if (m < 10) throw std::invalid_argument("mia_accuracy: fewer than 10 samples per side");

  std::mt19937_64 rng(seed);
  const auto perm_members = random_permutation(rng, members.size());
  const auto perm_non = random_permutation(rng, non_members.size());

  // Balanced subsample of m per side; the first 70% of each side trains the
  // attacker, the rest evaluates it, so both splits stay balanced.
  const size_t m_train = (m * 7) / 10;
  std::vector<std::pair<MiaFeature, int>> train;
  std::vector<std::pair<MiaFeature, int>> eval;
  for (size_t i = 0; i < m; ++i) {
    auto& dst_m = i < m_train ? train : eval;
    dst_m.push_back({members[perm_members[i]], 1});
    dst_m.push_back({non_members[perm_non[i]], 0});
  }

  LogisticModel model;
  {
    double s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0;
    for (const auto& [f, y] : train) {
      s1 += f.loss;
      s2 += f.confidence;
    }
    model.mean_loss = s1 / static_cast<double>(train.size());
    model.mean_conf = s2 / static_cast<double>(train.size());
    for (const auto& [f, y] : train) {
      q1 += (f.loss - model.mean_loss) * (f.loss - model.mean_loss);
      q2 += (f.confidence - model.mean_conf) * (f.confidence - model.mean_conf);
    }
    model.std_loss = std::max(std::sqrt(q1 / static_cast<double>(train.size())), 1e-12);
    model.std_conf = std::max(std::sqrt(q2 / static_cast<double>(train.size())), 1e-12);
  }

  constexpr int kIterations = 200;
  constexpr double kLr = 0.1;
  for (int it = 0; it < kIterations; ++it) {
    double g_w1 = 0.0, g_w2 = 0.0, g_b = 0.0;
    for (const auto& [f, y] : train) {
      const double err = model.prob(f) - static_cast<double>(y);
      g_w1 += err * (f.loss - model.mean_loss) / model.std_loss;
      g_w2 += err * (f.confidence - model.mean_conf) / model.std_conf;
      g_b += err;
    }
    const double inv = 1.0 / static_cast<double>(train.size());
    model.w_loss -= kLr * g_w1 * inv;
    model.w_conf -= kLr * g_w2 * inv;
    model.bias -= kLr * g_b * inv;
  }

  size_t correct = 0;
  for (const auto& [f, y] : eval) {
    const int pred = model.prob(f) >= 0.5 ? 1 : 0;
    if (pred == y) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(eval.size());
}

double mia_accuracy(const NetworkSpec& spec, const ParamSet& params, const Dataset& target_data,
                    std::span<const size_t> target_indices, const Dataset& test_data, uint64_t seed) {
  const auto member_features = mia_features(spec, params, target_data, target_indices);
  const auto test_idx = all_indices(static_cast<size_t>(test_data.size()));
  const auto non_member_features = mia_features(spec, params, test_data, test_idx);
  return mia_accuracy_from_features(member_features, non_member_features, seed);
}

namespace {

double triggered_rate(const NetworkSpec& spec, const ParamSet& params, const Dataset& test_set,
                      const BackdoorSpec& bd, bool score_target) {
  const Tensor triggered = apply_trigger(test_set.features, bd);
  const auto preds = predict_labels(spec, params, triggered);
  size_t hits = 0;
  size_t denom = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (test_set.labels[i] == bd.target_label) continue;  // true target class excluded
    ++denom;
    if (score_target ? preds[i] == bd.target_label : preds[i] == test_set.labels[i]) ++hits;
  }
  if (denom == 0) throw std::runtime_error("backdoor metric: no test sample with true label != target");
  return static_cast<double>(hits) / static_cast<double>(denom);
}

}  // namespace

double asr(const NetworkSpec& spec, const ParamSet& params, const Dataset& test_set, const BackdoorSpec& bd) {
  return triggered_rate(spec, params, test_set, bd, true);
}

double backdoor_accuracy(const NetworkSpec& spec, const ParamSet& params, const Dataset& test_set,
                         const BackdoorSpec& bd) {
  return triggered_rate(spec, params, test_set, bd, false);
}

double rtr(const Timing& timing) {
  if (timing.unlearn_seconds <= 0.0) throw std::runtime_error("rtr: unlearning time is zero, metric undefined");
  return timing.train_seconds / timing.unlearn_seconds;
}

double bee(const Timing& timing) {
  if (timing.single_epoch_seconds <= 0.0) {
    throw std::runtime_error("bee: single-epoch time is zero, metric undefined");
  }
  return timing.unlearn_seconds / timing.single_epoch_seconds;
}

TrialStats trial_stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("trial_stats: no values");
  TrialStats s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double q = 0.0;
    for (double v : values) q += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(q / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace fedunlearn
