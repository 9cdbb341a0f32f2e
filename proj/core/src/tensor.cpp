#include "fedunlearn/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fedunlearn {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape has non-positive dimension " + shape_str(shape));
    n *= d;
  }
  return shape.empty() ? 0 : n;
}

std::string shape_str(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int64_t> shape_, double fill) : shape(std::move(shape_)) {
  values.assign(static_cast<size_t>(shape_numel(shape)), fill);
}

Tensor Tensor::from_values(std::vector<int64_t> shape_, std::vector<double> values_) {
  if (shape_numel(shape_) != static_cast<int64_t>(values_.size())) {
    throw std::invalid_argument("tensor value count does not match shape " + shape_str(shape_));
  }
  Tensor t;
  t.shape = std::move(shape_);
  t.values = std::move(values_);
  return t;
}

int64_t Tensor::row_width() const {
  if (shape.empty()) return 0;
  int64_t w = 1;
  for (size_t i = 1; i < shape.size(); ++i) w *= shape[i];
  return w;
}

bool Tensor::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace fedunlearn
