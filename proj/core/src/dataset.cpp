#include "fedunlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fedunlearn/rng.hpp"

namespace fedunlearn {

void Dataset::validate() const {
  if (size() < 1) throw std::invalid_argument("dataset: empty");
  if (static_cast<int64_t>(labels.size()) != size()) throw std::invalid_argument("dataset: label count mismatch");
  if (class_count < 1) throw std::invalid_argument("dataset: class_count < 1");
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw std::invalid_argument("dataset: label out of range");
  }
  for (double v : features.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("dataset: feature outside [0,1]");
  }
}

namespace {

uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) throw std::runtime_error("idx: truncated file " + path);
  return (uint32_t(buf[0]) << 24) | (uint32_t(buf[1]) << 16) | (uint32_t(buf[2]) << 8) | uint32_t(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path);
  return in;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  constexpr uint32_t kImagesMagic = 0x00000803;
  constexpr uint32_t kLabelsMagic = 0x00000801;

  auto img = open_binary(images_path);
  const uint32_t img_magic = read_u32_be(img, images_path);
  if (img_magic != kImagesMagic) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "idx: bad image magic 0x%08x in ", img_magic);
    throw std::runtime_error(msg + images_path);
  }
  const uint32_t n = read_u32_be(img, images_path);
  const uint32_t rows_n = read_u32_be(img, images_path);
  const uint32_t cols_n = read_u32_be(img, images_path);
  const size_t pixels = size_t(n) * rows_n * cols_n;
  std::vector<unsigned char> raw(pixels);
  if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels))) {
    throw std::runtime_error("idx: truncated image data in " + images_path);
  }

  auto lab = open_binary(labels_path);
  const uint32_t lab_magic = read_u32_be(lab, labels_path);
  if (lab_magic != kLabelsMagic) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "idx: bad label magic 0x%08x in ", lab_magic);
    throw std::runtime_error(msg + labels_path);
  }
  const uint32_t n_labels = read_u32_be(lab, labels_path);
  if (n_labels != n) {
    throw std::runtime_error("idx: image count " + std::to_string(n) + " does not match label count " +
                             std::to_string(n_labels));
  }
  std::vector<unsigned char> raw_labels(n_labels);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(n_labels))) {
    throw std::runtime_error("idx: truncated label data in " + labels_path);
  }

  Dataset ds;
  ds.features = Tensor({int64_t(n), int64_t(rows_n) * int64_t(cols_n)});
  for (size_t i = 0; i < pixels; ++i) ds.features.values[i] = raw[i] / 255.0;
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  int max_label = 0;
  for (int y : ds.labels) max_label = std::max(max_label, y);
  ds.class_count = max_label + 1;
  ds.source_tag = "idx:" + images_path;
  return ds;
}

Dataset synth_blobs(int classes, int per_class, int64_t dim, double spread, uint64_t seed, int border) {
  if (classes < 2) throw std::invalid_argument("synth_blobs: classes must be >= 2");
  if (per_class < 1) throw std::invalid_argument("synth_blobs: per_class must be >= 1");
  if (dim < 1) throw std::invalid_argument("synth_blobs: dim must be >= 1");
  if (border < 0) throw std::invalid_argument("synth_blobs: border must be >= 0");
  std::vector<uint8_t> interior(static_cast<size_t>(dim), 1);
  if (border > 0) {
    const auto side = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (side * side != dim) throw std::invalid_argument("synth_blobs: border requires a square dim");
    if (2 * border >= side) throw std::invalid_argument("synth_blobs: border leaves no interior");
    for (int64_t r = 0; r < side; ++r) {
      for (int64_t c = 0; c < side; ++c) {
        const bool edge = r < border || c < border || r >= side - border || c >= side - border;
        interior[static_cast<size_t>(r * side + c)] = edge ? 0 : 1;
      }
    }
  }
  std::mt19937_64 rng(seed);

  std::vector<double> centers(static_cast<size_t>(classes) * static_cast<size_t>(dim));
  for (size_t i = 0; i < centers.size(); ++i) {
    centers[i] = interior[i % static_cast<size_t>(dim)] ? uniform_unit(rng) : 0.0;
  }

  Dataset ds;
  ds.class_count = classes;
  ds.source_tag = "synth_blobs";
  ds.features = Tensor({int64_t(classes) * per_class, dim});
  ds.labels.resize(static_cast<size_t>(classes) * static_cast<size_t>(per_class));
  size_t row = 0;
  for (int c = 0; c < classes; ++c) {
    const double* center = &centers[static_cast<size_t>(c) * static_cast<size_t>(dim)];
    for (int k = 0; k < per_class; ++k, ++row) {
      double* x = &ds.features.values[row * static_cast<size_t>(dim)];
      for (int64_t j = 0; j < dim; ++j) {
        x[j] = std::clamp(center[j] + spread * gaussian(rng), 0.0, 1.0);
      }
      ds.labels[row] = c;
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_ratio, uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw std::invalid_argument("split: train_ratio must be in (0,1)");
  const size_t n = static_cast<size_t>(ds.size());
  std::mt19937_64 rng(seed);
  const auto perm = random_permutation(rng, n);
  const size_t n_train = static_cast<size_t>(std::llround(train_ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) throw std::invalid_argument("split: a side would be empty");

  auto take = [&](size_t begin, size_t end, const char* tag) {
    Dataset out;
    out.class_count = ds.class_count;
    out.source_tag = ds.source_tag + ":" + tag;
    const std::span<const size_t> idx(perm.data() + begin, end - begin);
    out.features = gather_rows(ds.features, idx);
    out.labels = gather_labels(ds.labels, idx);
    return out;
  };
  return {take(0, n_train, "train"), take(n_train, n, "test")};
}

Tensor gather_rows(const Tensor& features, std::span<const size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("gather_rows: empty index set");
  const int64_t d = features.row_width();
  Tensor out({static_cast<int64_t>(indices.size()), d});
  for (size_t i = 0; i < indices.size(); ++i) {
    const double* src = &features.values[indices[i] * static_cast<size_t>(d)];
    std::copy(src, src + d, &out.values[i * static_cast<size_t>(d)]);
  }
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const size_t> indices) {
  std::vector<int> out(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) out[i] = labels[indices[i]];
  return out;
}

std::vector<size_t> all_indices(size_t n) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace fedunlearn
