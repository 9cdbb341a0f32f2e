#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedunlearn/tensor.hpp"

namespace fedunlearn {

/// Labeled samples with features scaled to [0,1]. features is [N, d].
struct Dataset {
  Tensor features;
  std::vector<int> labels;
  int class_count = 0;
  std::string source_tag;

  int64_t size() const { return features.rows(); }
  int64_t dim() const { return features.row_width(); }
  void validate() const;  // throws std::invalid_argument on broken invariants
};

/// Parse a big-endian IDX image/label file pair (magic 0x00000803 for images,
/// 0x00000801 for labels). Pixels are divided by 255 and images flattened to
/// [N, rows*cols]. Throws std::runtime_error on bad magic, truncation, or a
/// sample-count mismatch between the two files.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Gaussian blobs around seeded uniform centers in [0,1]^dim, clipped to
/// [0,1]. Samples are emitted class-major: per_class samples of class 0,
/// then class 1, ... Deterministic in seed.
///
/// border > 0 treats samples as square images (dim must be a perfect square)
/// and pins the blob centers to 0 within `border` pixels of the edge, giving
/// the dark margins typical of digit images.
Dataset synth_blobs(int classes, int per_class, int64_t dim, double spread, uint64_t seed, int border = 0);

/// Seeded split into (train, test); train receives round(train_ratio * N)
/// samples of a seeded permutation.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_ratio, uint64_t seed);

/// Copy the selected rows into a contiguous batch.
Tensor gather_rows(const Tensor& features, std::span<const size_t> indices);
std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const size_t> indices);
std::vector<size_t> all_indices(size_t n);

}  // namespace fedunlearn
