#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedunlearn/fed.hpp"
#include "fedunlearn/network.hpp"
#include "fedunlearn/unlearn.hpp"

namespace fedunlearn {

/// Masked-retraining state. Per block: a fixed buffer holding the base values
/// with masked positions zeroed, the flat indices of the masked positions,
/// and a trainable vector (one value per masked position) initialized to the
/// base values at those positions. Only the trainable vectors ever change.
struct TrimState {
  struct Block {
    std::string name;
    Tensor buffer;
    std::vector<int64_t> indices;
    std::vector<double> trainable;
  };
  std::vector<Block> blocks;

  size_t trainable_count() const;
  /// Live parameters: buffer plus trainable values added at their positions.
  ParamSet reconstruct() const;
};

TrimState trim_initialize(const ParamSet& base, const ResetMask& mask);

/// Forward pass through the reconstructed live parameters.
Tensor trim_forward(const TrimState& trim, const NetworkSpec& spec, const Tensor& batch);

/// One federated retraining round over retain samples updating only the
/// trainable vectors (cfg.local_epochs local epochs per client, 1 for the
/// standard procedure). Returns the fully reconstructed parameters;
/// non-masked elements are bit-identical to their pre-retrain values. Throws
/// std::runtime_error when every client's retain set is empty.
ParamSet trim_retrain(TrimState trim, const NetworkSpec& spec, const Dataset& data, const Partition& partition,
                      const FedConfig& cfg, DataAccessLog* log = nullptr,
                      std::vector<ClientWarning>* warnings = nullptr);

}  // namespace fedunlearn
