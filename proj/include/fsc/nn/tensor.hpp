#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fsc/error.hpp"

namespace fsc::nn {

/// Storage for anything Eigen maps over. A fixed base alignment keeps the
/// vectorized reductions on the same code path from run to run, so results
/// are bit-reproducible for a given seed.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

/// Dense (batch, channels, length) tensor, row-major.
template <typename T>
struct Tensor3 {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  AlignedVector<T> data;

  Tensor3() = default;
  Tensor3(std::size_t b, std::size_t c, std::size_t l, T fill = T(0))
      : batch(b), channels(c), length(l), data(b * c * l, fill) {
    if (b == 0 || c == 0 || l == 0) fail(ErrorCode::ShapeMismatch, "tensor dimensions must be >= 1");
  }

  std::size_t sample_size() const noexcept { return channels * length; }

  T& operator()(std::size_t b, std::size_t c, std::size_t t) noexcept { return data[(b * channels + c) * length + t]; }
  const T& operator()(std::size_t b, std::size_t c, std::size_t t) const noexcept {
    return data[(b * channels + c) * length + t];
  }

  std::span<T> sample(std::size_t b) noexcept { return {data.data() + b * sample_size(), sample_size()}; }
  std::span<const T> sample(std::size_t b) const noexcept { return {data.data() + b * sample_size(), sample_size()}; }

  bool same_shape(const Tensor3& o) const noexcept {
    return batch == o.batch && channels == o.channels && length == o.length;
  }
};

/// Row-major (rows, cols) matrix used for the dense head and probabilities.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  AlignedVector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
  std::span<const T> row(std::size_t r) const noexcept { return {data.data() + r * cols, cols}; }
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::ShapeMismatch, what);
}

}  // namespace fsc::nn
