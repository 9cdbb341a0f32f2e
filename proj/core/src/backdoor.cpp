#include "fedunlearn/backdoor.hpp"

#include <cmath>
#include <stdexcept>

#include "fedunlearn/rng.hpp"

namespace fedunlearn {

namespace {

int64_t image_side(int64_t dim) {
  const auto side = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(dim))));
  if (side * side != dim) {
    throw std::invalid_argument("backdoor: features of width " + std::to_string(dim) + " are not square images");
  }
  return side;
}

void stamp(double* image, int64_t side, const BackdoorSpec& spec) {
  const int64_t t = spec.trigger_size;
  int64_t r0 = 0;
  int64_t c0 = 0;
  switch (spec.corner) {
    case TriggerCorner::TopLeft:
      break;
    case TriggerCorner::TopRight:
      c0 = side - t;
      break;
    case TriggerCorner::BottomLeft:
      r0 = side - t;
      break;
    case TriggerCorner::BottomRight:
      r0 = side - t;
      c0 = side - t;
      break;
  }
  for (int64_t r = 0; r < t; ++r) {
    for (int64_t c = 0; c < t; ++c) image[(r0 + r) * side + (c0 + c)] = spec.trigger_value;
  }
}

void validate_spec(const BackdoorSpec& spec, int64_t side) {
  if (spec.trigger_size < 1 || spec.trigger_size > side) {
    throw std::invalid_argument("backdoor: trigger of size " + std::to_string(spec.trigger_size) +
                                " does not fit in side " + std::to_string(side));
  }
}

}  // namespace

Tensor apply_trigger(const Tensor& features, const BackdoorSpec& spec) {
  const int64_t side = image_side(features.row_width());
  validate_spec(spec, side);
  Tensor out = features;
  for (int64_t n = 0; n < out.rows(); ++n) {
    stamp(&out.values[static_cast<size_t>(n * out.row_width())], side, spec);
  }
  return out;
}

Dataset poison(const Dataset& ds, const Partition& partition, const BackdoorSpec& spec, uint64_t seed) {
  const int64_t side = image_side(ds.dim());
  validate_spec(spec, side);
  if (spec.target_label < 0 || spec.target_label >= ds.class_count) {
    throw std::invalid_argument("backdoor: target label " + std::to_string(spec.target_label) + " out of range");
  }
  if (spec.poisoned_client < 0 || spec.poisoned_client >= partition.n_clients()) {
    throw std::invalid_argument("backdoor: poisoned client " + std::to_string(spec.poisoned_client) +
                                " out of range");
  }
  if (!(spec.poison_fraction > 0.0 && spec.poison_fraction <= 1.0)) {
    throw std::invalid_argument("backdoor: poison_fraction must be in (0,1]");
  }
  const auto& client = partition.client_indices[static_cast<size_t>(spec.poisoned_client)];
  std::vector<size_t> victims(client.begin(), client.end());
  if (spec.poison_fraction < 1.0) {
    std::mt19937_64 rng(seed);
    const auto perm = random_permutation(rng, victims.size());
    const auto keep = static_cast<size_t>(std::llround(spec.poison_fraction * static_cast<double>(victims.size())));
    std::vector<size_t> subset;
    subset.reserve(keep);
    for (size_t k = 0; k < keep; ++k) subset.push_back(victims[perm[k]]);
    victims = std::move(subset);
  }
  Dataset out = ds;
  for (size_t i : victims) {
    stamp(&out.features.values[i * static_cast<size_t>(ds.dim())], side, spec);
    out.labels[i] = spec.target_label;
  }
  return out;
}

}  // namespace fedunlearn
