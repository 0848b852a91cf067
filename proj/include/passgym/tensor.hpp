// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_TENSOR_HPP
#define PASSGYM_TENSOR_HPP

#include <cstdint>
#include <numeric>
#include <vector>

namespace passgym::ir {

enum class Dtype { F32 };

// Static shape of a tensor value. An empty dim list is a scalar.
struct TensorShape {
  std::vector<int64_t> dims;
  Dtype dtype = Dtype::F32;

  int64_t rank() const { return static_cast<int64_t>(dims.size()); }

  int64_t element_count() const {
    int64_t n = 1;
    for (int64_t d : dims) n *= d;
    return n;
  }

  bool operator==(const TensorShape& other) const {
    return dims == other.dims && dtype == other.dtype;
  }
  bool operator!=(const TensorShape& other) const { return !(*this == other); }
};

inline TensorShape make_shape(std::vector<int64_t> dims) {
  return TensorShape{std::move(dims), Dtype::F32};
}

// Runtime tensor value. Interpreter arithmetic is 64-bit regardless of the
// declared dtype; data is row-major.
struct Tensor {
  TensorShape shape;
  std::vector<double> data;

  static Tensor zeros(const TensorShape& s) {
    return Tensor{s, std::vector<double>(static_cast<size_t>(s.element_count()), 0.0)};
  }
  static Tensor filled(const TensorShape& s, double v) {
    return Tensor{s, std::vector<double>(static_cast<size_t>(s.element_count()), v)};
  }
};

// Row-major strides for an index space given by dims.
std::vector<int64_t> row_major_strides(const std::vector<int64_t>& dims);

}  // namespace passgym::ir

#endif  // PASSGYM_TENSOR_HPP
