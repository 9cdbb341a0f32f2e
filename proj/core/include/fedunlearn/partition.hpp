#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "fedunlearn/dataset.hpp"

namespace fedunlearn {

enum class SampleFilter { All, RetainOnly };

/// Assignment of dataset samples to clients plus a forget flag per sample.
/// Client index lists are disjoint and cover a subset of [0, N). Counts are
/// derived so they can never drift from the flags.
struct Partition {
  std::vector<std::vector<size_t>> client_indices;
  std::vector<uint8_t> forget_flags;  // length == dataset size

  int n_clients() const { return static_cast<int>(client_indices.size()); }
  size_t assigned_count() const;
  size_t target_count() const;  // N_T: flagged samples among assigned ones
  size_t client_forget_count(int client) const;
  size_t client_retain_count(int client) const;
  std::vector<size_t> client_samples(int client, SampleFilter filter) const;
  std::vector<size_t> target_indices() const;  // assigned and flagged
  void validate(size_t dataset_size) const;
};

struct ForgetClient {
  int client = 0;
};
struct ForgetClass {
  int label = 0;
};
struct ForgetSamples {
  std::vector<size_t> indices;
};
using ForgetSelector = std::variant<ForgetClient, ForgetClass, ForgetSamples>;

/// Seeded shuffle then near-equal contiguous split; client sizes differ by at
/// most one.
Partition partition_random(const Dataset& ds, int n_clients, uint64_t seed);

/// Each shared class is split evenly across all clients; exclusive_classes[k]
/// is assigned wholly to client k. Requires exclusive_classes.size() ==
/// n_clients and shared/exclusive disjoint; throws if a class has no samples.
Partition partition_preferential(const Dataset& ds, int n_clients, const std::vector<int>& shared_classes,
                                 const std::vector<int>& exclusive_classes, uint64_t seed);

/// Set forget flags per the selector. A class selector flags every sample of
/// that label (the dataset provides the labels); a client selector flags that
/// client's assigned samples.
Partition mark_forget(const Dataset& ds, Partition partition, const ForgetSelector& selector);

}  // namespace fedunlearn
