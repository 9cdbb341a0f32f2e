#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fedunlearn/curvature.hpp"
#include "fedunlearn/fed.hpp"
#include "fedunlearn/network.hpp"
#include "fedunlearn/partition.hpp"

namespace fedunlearn {

/// Per-client curvature statistics: Hessian diagonals of the mean loss over
/// the client's forget-flagged samples and over the rest, with counts. An
/// empty side is represented by a zero diagonal and a zero count.
struct ClientStats {
  HessianDiag h_forget;
  HessianDiag h_retain;
  size_t n_forget = 0;
  size_t n_retain = 0;
};

/// Per-parameter-element scores, shape-congruent with the model.
struct InfoScores {
  std::vector<ParamSet::Block> blocks;
  const ParamSet::Block* find(const std::string& name) const;
};

/// Boolean per-element selection. Per block, the number of selected elements
/// is round(alpha_removal * block_size), half away from zero.
struct ResetMask {
  struct Block {
    std::string name;
    std::vector<int64_t> shape;
    std::vector<uint8_t> selected;
  };
  std::vector<Block> blocks;
  double alpha_removal = 0.0;

  size_t selected_count() const;
  const Block* find(const std::string& name) const;
};

/// Client-local statistics pass: curvature diagonals over the client's forget
/// and retain samples, evaluated at the trained global parameters. Throws if
/// the client has no samples at all.
ClientStats client_stats(const NetworkSpec& spec, const ParamSet& trained, const Dataset& data,
                         const Partition& partition, int client, DataAccessLog* log = nullptr);

/// Server-side aggregation:
///   h       = (1/N)   sum_c (n_f[c] * h_forget[c] + n_r[c] * h_retain[c])
///   h_prime = (1/N_T) sum_c  n_f[c] * h_forget[c]
/// Throws std::runtime_error when N_T == 0 (nothing to forget).
std::pair<HessianDiag, HessianDiag> aggregate_hessians(const std::vector<ClientStats>& stats);

/// Elementwise (h_prime/h)^2, zero where h <= eps_h (vanishing-curvature
/// guard).
InfoScores target_information_score(const HessianDiag& h, const HessianDiag& h_prime, double eps_h = 1e-12);

/// Sum of all scores: the model-wide information proxy for the forget set.
double fisher_total(const HessianDiag& h, const HessianDiag& h_prime, double eps_h = 1e-12);

/// Per block, mark the round(alpha * size) elements with the highest score;
/// ties broken by lower flat index.
ResetMask select_reset_mask(const InfoScores& scores, double alpha_removal);

/// Masked elements take the init-snapshot value, others keep the trained one.
ParamSet reset_params(const ParamSet& trained, const ParamSet& init_snapshot, const ResetMask& mask);

/// Flat audit CSV: block,flat_index,tis,selected.
void export_scores_csv(const InfoScores& scores, const ResetMask& mask, const std::string& path);

struct UnlearnResult {
  ParamSet theta_reset;
  ParamSet theta_retrained;
  InfoScores scores;
  ResetMask mask;
  Timing timing;
  std::vector<ClientWarning> warnings;
};

/// End-to-end unlearning: per-client statistics, server aggregation, scores,
/// mask selection, reset, then one federated retraining epoch over retain
/// samples that updates only the reset elements. cfg.local_epochs controls the
/// retraining epochs (1 by default). Wall clock of the whole procedure goes to
/// timing.unlearn_seconds.
UnlearnResult unlearn_pipeline(const NetworkSpec& spec, const ParamSet& trained, const ParamSet& init_snapshot,
                               const Dataset& data, const Partition& partition, double alpha_removal,
                               const FedConfig& cfg, double eps_h = 1e-12, DataAccessLog* log = nullptr);

}  // namespace fedunlearn
