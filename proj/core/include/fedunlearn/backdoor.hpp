#pragma once

#include "fedunlearn/dataset.hpp"
#include "fedunlearn/partition.hpp"

namespace fedunlearn {

enum class TriggerCorner { TopLeft, TopRight, BottomLeft, BottomRight };

struct BackdoorSpec {
  int trigger_size = 3;
  double trigger_value = 1.0;
  TriggerCorner corner = TriggerCorner::TopRight;
  int target_label = 9;
  int poisoned_client = 0;
  // Fraction of the poisoned client's samples that receive trigger and label
  // flip. 1.0 poisons everything; below 1.0 the client keeps a seeded random
  // remainder clean, which makes the implant survive averaging against
  // honest clients.
  double poison_fraction = 1.0;
};

/// Stamp the trigger patch on every row of a [N, side*side] feature tensor.
/// Pure pixel edit; requires square images and a trigger that fits.
Tensor apply_trigger(const Tensor& features, const BackdoorSpec& spec);

/// Poisoned copy of the dataset: every sample assigned to spec.poisoned_client
/// (or a seeded poison_fraction subset of them) receives the trigger and its
/// label is rewritten to spec.target_label. All other samples are returned
/// bit-identical.
Dataset poison(const Dataset& ds, const Partition& partition, const BackdoorSpec& spec, uint64_t seed = 0);

}  // namespace fedunlearn
