#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedunlearn {

/// Dense row-major float64 tensor. All numeric state in the library lives in
/// these; shapes are immutable after construction.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape_, double fill = 0.0);
  static Tensor from_values(std::vector<int64_t> shape_, std::vector<double> values_);

  int64_t numel() const { return static_cast<int64_t>(values.size()); }
  int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
  // Width of one row: product of all trailing dimensions.
  int64_t row_width() const;

  double& at(int64_t r, int64_t c) { return values[static_cast<size_t>(r * row_width() + c)]; }
  double at(int64_t r, int64_t c) const { return values[static_cast<size_t>(r * row_width() + c)]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
};

int64_t shape_numel(const std::vector<int64_t>& shape);
std::string shape_str(const std::vector<int64_t>& shape);

}  // namespace fedunlearn
