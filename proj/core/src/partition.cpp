#include "fedunlearn/partition.hpp"

#include <algorithm>
#include <stdexcept>

#include "fedunlearn/rng.hpp"

namespace fedunlearn {

size_t Partition::assigned_count() const {
  size_t n = 0;
  for (const auto& c : client_indices) n += c.size();
  return n;
}

size_t Partition::target_count() const {
  size_t n = 0;
  for (const auto& c : client_indices) {
    for (size_t i : c) n += forget_flags[i] ? 1 : 0;
  }
  return n;
}

size_t Partition::client_forget_count(int client) const {
  size_t n = 0;
  for (size_t i : client_indices.at(static_cast<size_t>(client))) n += forget_flags[i] ? 1 : 0;
  return n;
}

size_t Partition::client_retain_count(int client) const {
  const auto& idx = client_indices.at(static_cast<size_t>(client));
  return idx.size() - client_forget_count(client);
}

std::vector<size_t> Partition::client_samples(int client, SampleFilter filter) const {
  const auto& idx = client_indices.at(static_cast<size_t>(client));
  std::vector<size_t> out;
  out.reserve(idx.size());
  for (size_t i : idx) {
    if (filter == SampleFilter::RetainOnly && forget_flags[i]) continue;
    out.push_back(i);
  }
  return out;
}

std::vector<size_t> Partition::target_indices() const {
  std::vector<size_t> out;
  for (const auto& c : client_indices) {
    for (size_t i : c) {
      if (forget_flags[i]) out.push_back(i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Partition::validate(size_t dataset_size) const {
  if (forget_flags.size() != dataset_size) throw std::invalid_argument("partition: forget_flags length mismatch");
  std::vector<uint8_t> seen(dataset_size, 0);
  for (const auto& c : client_indices) {
    for (size_t i : c) {
      if (i >= dataset_size) throw std::invalid_argument("partition: sample index out of range");
      if (seen[i]) throw std::invalid_argument("partition: sample assigned to two clients");
      seen[i] = 1;
    }
  }
}

Partition partition_random(const Dataset& ds, int n_clients, uint64_t seed) {
  const size_t n = static_cast<size_t>(ds.size());
  if (n_clients < 1) throw std::invalid_argument("partition_random: n_clients must be >= 1");
  if (static_cast<size_t>(n_clients) > n) throw std::invalid_argument("partition_random: more clients than samples");

  std::mt19937_64 rng(seed);
  const auto perm = random_permutation(rng, n);

  Partition p;
  p.forget_flags.assign(n, 0);
  p.client_indices.resize(static_cast<size_t>(n_clients));
  const size_t base = n / static_cast<size_t>(n_clients);
  const size_t extra = n % static_cast<size_t>(n_clients);
  size_t cursor = 0;
  for (size_t c = 0; c < static_cast<size_t>(n_clients); ++c) {
    const size_t take = base + (c < extra ? 1 : 0);
    auto& list = p.client_indices[c];
    list.assign(perm.begin() + static_cast<ptrdiff_t>(cursor), perm.begin() + static_cast<ptrdiff_t>(cursor + take));
    std::sort(list.begin(), list.end());
    cursor += take;
  }
  return p;
}

Partition partition_preferential(const Dataset& ds, int n_clients, const std::vector<int>& shared_classes,
                                 const std::vector<int>& exclusive_classes, uint64_t seed) {
  if (n_clients < 1) throw std::invalid_argument("partition_preferential: n_clients must be >= 1");
  if (exclusive_classes.size() != static_cast<size_t>(n_clients)) {
    throw std::invalid_argument("partition_preferential: need exactly one exclusive class per client");
  }
  for (int s : shared_classes) {
    for (int e : exclusive_classes) {
      if (s == e) throw std::invalid_argument("partition_preferential: class " + std::to_string(s) +
                                              " is both shared and exclusive");
    }
  }

  const size_t n = static_cast<size_t>(ds.size());
  std::vector<std::vector<size_t>> by_class(static_cast<size_t>(ds.class_count));
  for (size_t i = 0; i < n; ++i) by_class[static_cast<size_t>(ds.labels[i])].push_back(i);

  auto class_samples = [&](int label) -> const std::vector<size_t>& {
    if (label < 0 || label >= ds.class_count || by_class[static_cast<size_t>(label)].empty()) {
      throw std::invalid_argument("partition_preferential: class " + std::to_string(label) +
                                  " absent from dataset");
    }
    return by_class[static_cast<size_t>(label)];
  };

  std::mt19937_64 rng(seed);
  Partition p;
  p.forget_flags.assign(n, 0);
  p.client_indices.resize(static_cast<size_t>(n_clients));

  for (int s : shared_classes) {
    const auto& samples = class_samples(s);
    const auto perm = random_permutation(rng, samples.size());
    const size_t base = samples.size() / static_cast<size_t>(n_clients);
    const size_t extra = samples.size() % static_cast<size_t>(n_clients);
    size_t cursor = 0;
    for (size_t c = 0; c < static_cast<size_t>(n_clients); ++c) {
      const size_t take = base + (c < extra ? 1 : 0);
      for (size_t k = 0; k < take; ++k) p.client_indices[c].push_back(samples[perm[cursor + k]]);
      cursor += take;
    }
  }
  for (size_t c = 0; c < exclusive_classes.size(); ++c) {
    const auto& samples = class_samples(exclusive_classes[c]);
    p.client_indices[c].insert(p.client_indices[c].end(), samples.begin(), samples.end());
  }
  for (auto& list : p.client_indices) std::sort(list.begin(), list.end());
  return p;
}

Partition mark_forget(const Dataset& ds, Partition partition, const ForgetSelector& selector) {
  std::fill(partition.forget_flags.begin(), partition.forget_flags.end(), 0);
  if (const auto* byclient = std::get_if<ForgetClient>(&selector)) {
    if (byclient->client < 0 || byclient->client >= partition.n_clients()) {
      throw std::invalid_argument("mark_forget: client " + std::to_string(byclient->client) + " out of range");
    }
    for (size_t i : partition.client_indices[static_cast<size_t>(byclient->client)]) partition.forget_flags[i] = 1;
  } else if (const auto* byclass = std::get_if<ForgetClass>(&selector)) {
    if (byclass->label < 0 || byclass->label >= ds.class_count) {
      throw std::invalid_argument("mark_forget: label " + std::to_string(byclass->label) + " out of range");
    }
    for (size_t i = 0; i < partition.forget_flags.size(); ++i) {
      if (ds.labels[i] == byclass->label) partition.forget_flags[i] = 1;
    }
  } else {
    const auto& bysamples = std::get<ForgetSamples>(selector);
    for (size_t i : bysamples.indices) {
      if (i >= partition.forget_flags.size()) {
        throw std::invalid_argument("mark_forget: sample index " + std::to_string(i) + " out of range");
      }
      partition.forget_flags[i] = 1;
    }
  }
  return partition;
}

}  // namespace fedunlearn
