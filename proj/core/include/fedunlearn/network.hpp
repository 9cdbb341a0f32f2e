#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fedunlearn/tensor.hpp"

namespace fedunlearn {

struct DenseLayer {
  int64_t in = 0;
  int64_t out = 0;
  bool bias = true;
};
struct ReluLayer {};
struct FlattenLayer {};  // identity on already-flat [N, d] features

using Layer = std::variant<DenseLayer, ReluLayer, FlattenLayer>;

struct NetworkSpec {
  std::vector<Layer> layers;
  int num_classes = 0;
};

/// Fully-connected classifier: input_dim -> hidden... -> num_classes with
/// ReLU between dense layers.
NetworkSpec mlp_spec(int64_t input_dim, const std::vector<int64_t>& hidden, int num_classes);

/// Throws std::invalid_argument when adjacent layer widths are incompatible
/// or the final width differs from num_classes.
void validate_spec(const NetworkSpec& spec);

int64_t input_width(const NetworkSpec& spec);
int64_t output_width(const NetworkSpec& spec);

/// Ordered, named parameter blocks of a network. Dense layer k contributes
/// "dense<k>.weight" with shape [out, in] and, when biased, "dense<k>.bias"
/// with shape [out].
struct ParamSet {
  struct Block {
    std::string name;
    Tensor tensor;
  };
  std::vector<Block> blocks;
  uint64_t rng_seed = 0;

  int64_t numel() const;
  const Block* find(const std::string& name) const;
  Block* find(const std::string& name);
};

bool shape_congruent(const ParamSet& a, const ParamSet& b);
bool bit_equal(const ParamSet& a, const ParamSet& b);
ParamSet zeros_like(const ParamSet& p);

/// Seeded initialization: weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)),
/// biases zero. Deterministic: the generator is mt19937_64(seed) and blocks are
/// filled in layer order, row-major, so the same (spec, seed) reproduces the
/// ParamSet bit-exactly.
ParamSet init_params(const NetworkSpec& spec, uint64_t seed);

/// Logits [batch, num_classes]. Pure function of its arguments.
Tensor forward(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch);

/// Forward pass retaining every intermediate activation; activations[0] is the
/// input batch and activations[i+1] the output of layer i.
struct ForwardTrace {
  std::vector<Tensor> activations;
  const Tensor& logits() const { return activations.back(); }
};
ForwardTrace forward_trace(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch);

}  // namespace fedunlearn
