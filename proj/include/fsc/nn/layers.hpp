#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "fsc/nn/tensor.hpp"

namespace fsc::nn {

enum class Mode { Train, Infer };

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 1-D convolution, stride 1, "same" zero padding: floor((K-1)/2) on the
/// left, ceil((K-1)/2) on the right.
template <typename T>
struct ConvLayer {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel = 1;
  AlignedVector<T> weight;  // (out_ch, in_ch, kernel)
  AlignedVector<T> bias;    // out_ch

  ConvLayer() = default;
  ConvLayer(std::size_t in, std::size_t out, std::size_t k)
      : in_ch(in), out_ch(out), kernel(k), weight(in * out * k, T(0)), bias(out, T(0)) {}

  std::size_t pad_left() const noexcept { return (kernel - 1) / 2; }
  T& w(std::size_t o, std::size_t i, std::size_t k) noexcept { return weight[(o * in_ch + i) * kernel + k]; }
  const T& w(std::size_t o, std::size_t i, std::size_t k) const noexcept { return weight[(o * in_ch + i) * kernel + k]; }
};

template <typename T>
struct BatchNormLayer {
  std::size_t channels = 0;
  std::vector<T> gamma, beta;
  std::vector<T> running_mean, running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);

  BatchNormLayer() = default;
  explicit BatchNormLayer(std::size_t c)
      : channels(c), gamma(c, T(1)), beta(c, T(0)), running_mean(c, T(0)), running_var(c, T(1)) {}
};

/// He-uniform weights (bound sqrt(6 / fan_in)), zero bias.
template <typename T>
void he_uniform_init(ConvLayer<T>& layer, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_ch * layer.kernel));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& w : layer.weight) w = static_cast<T>(dist(rng));
  std::fill(layer.bias.begin(), layer.bias.end(), T(0));
}

namespace detail {

// cols(i*K + k, t) = x[i][t + k - pad_left], zero outside [0, L).
template <typename T>
void im2col(std::span<const T> x, std::size_t in_ch, std::size_t L, std::size_t K, std::size_t pad_left,
            RowMat<T>& cols) {
  cols.resize(static_cast<Eigen::Index>(in_ch * K), static_cast<Eigen::Index>(L));
  for (std::size_t i = 0; i < in_ch; ++i) {
    const T* src = x.data() + i * L;
    for (std::size_t k = 0; k < K; ++k) {
      T* dst = cols.data() + (i * K + k) * L;
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(pad_left);
      const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
      const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(L), static_cast<std::ptrdiff_t>(L) - shift);
      std::fill(dst, dst + std::max<std::ptrdiff_t>(t0, 0), T(0));
      if (t1 > t0) std::copy(src + t0 + shift, src + t1 + shift, dst + t0);
      std::fill(dst + std::max(t1, t0), dst + L, T(0));
    }
  }
}

template <typename T>
void col2im_add(const RowMat<T>& dcols, std::size_t in_ch, std::size_t L, std::size_t K, std::size_t pad_left,
                std::span<T> dx) {
  for (std::size_t i = 0; i < in_ch; ++i) {
    T* dst = dx.data() + i * L;
    for (std::size_t k = 0; k < K; ++k) {
      const T* src = dcols.data() + (i * K + k) * L;
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(pad_left);
      const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
      const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(L), static_cast<std::ptrdiff_t>(L) - shift);
      for (std::ptrdiff_t t = t0; t < t1; ++t) dst[t + shift] += src[t];
    }
  }
}

}  // namespace detail

template <typename T>
Tensor3<T> conv1d_forward(const Tensor3<T>& x, const ConvLayer<T>& layer) {
  require_shape(x.channels == layer.in_ch, "conv1d: input has " + std::to_string(x.channels) +
                                               " channels, layer expects " + std::to_string(layer.in_ch));
  const std::size_t L = x.length, O = layer.out_ch, I = layer.in_ch, K = layer.kernel;
  Tensor3<T> y(x.batch, O, L);
  const Eigen::Map<const RowMat<T>> W(layer.weight.data(), O, I * K);
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(layer.bias.data(), O);
  RowMat<T> cols;
  for (std::size_t b = 0; b < x.batch; ++b) {
    Eigen::Map<RowMat<T>> Y(y.sample(b).data(), O, L);
    if (K == 1) {
      const Eigen::Map<const RowMat<T>> X(x.sample(b).data(), I, L);
      Y.noalias() = W * X;
    } else {
      detail::im2col(x.sample(b), I, L, K, layer.pad_left(), cols);
      Y.noalias() = W * cols;
    }
    Y.colwise() += bias;
  }
  return y;
}

/// Accumulates weight/bias gradients into `grad` and returns dL/dx.
template <typename T>
Tensor3<T> conv1d_backward(const Tensor3<T>& x, const ConvLayer<T>& layer, const Tensor3<T>& dy, ConvLayer<T>& grad) {
  const std::size_t L = x.length, O = layer.out_ch, I = layer.in_ch, K = layer.kernel;
  require_shape(dy.batch == x.batch && dy.channels == O && dy.length == L, "conv1d backward: gradient shape");
  Tensor3<T> dx(x.batch, I, L);
  const Eigen::Map<const RowMat<T>> W(layer.weight.data(), O, I * K);
  Eigen::Map<RowMat<T>> dW(grad.weight.data(), O, I * K);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(grad.bias.data(), O);
  RowMat<T> cols, dcols;
  for (std::size_t b = 0; b < x.batch; ++b) {
    const Eigen::Map<const RowMat<T>> dY(dy.sample(b).data(), O, L);
    db += dY.rowwise().sum();
    if (K == 1) {
      const Eigen::Map<const RowMat<T>> X(x.sample(b).data(), I, L);
      dW.noalias() += dY * X.transpose();
      Eigen::Map<RowMat<T>> dX(dx.sample(b).data(), I, L);
      dX.noalias() = W.transpose() * dY;
    } else {
      detail::im2col(x.sample(b), I, L, K, layer.pad_left(), cols);
      dW.noalias() += dY * cols.transpose();
      dcols.noalias() = W.transpose() * dY;
      detail::col2im_add(dcols, I, L, K, layer.pad_left(), dx.sample(b));
    }
  }
  return dx;
}

template <typename T>
struct BatchNormCache {
  std::vector<T> xhat;     // normalized input, same layout as x
  std::vector<T> inv_std;  // per channel
};

/// Inference-mode batch norm with the running statistics.
template <typename T>
Tensor3<T> batchnorm_infer(const Tensor3<T>& x, const BatchNormLayer<T>& layer) {
  require_shape(x.channels == layer.channels, "batchnorm: channel count mismatch");
  Tensor3<T> y(x.batch, x.channels, x.length);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const T inv_std = T(1) / std::sqrt(layer.running_var[c] + layer.eps);
    const T scale = layer.gamma[c] * inv_std;
    const T shift = layer.beta[c] - layer.running_mean[c] * scale;
    for (std::size_t b = 0; b < x.batch; ++b) {
      const T* src = &x(b, c, 0);
      T* dst = &y(b, c, 0);
      for (std::size_t t = 0; t < x.length; ++t) dst[t] = src[t] * scale + shift;
    }
  }
  return y;
}

/// Train mode normalizes with batch statistics over (batch, length) and
/// updates the running stats (running_var takes the unbiased estimate).
/// Infer mode uses the running stats.
template <typename T>
Tensor3<T> batchnorm_forward(const Tensor3<T>& x, BatchNormLayer<T>& layer, Mode mode,
                             BatchNormCache<T>* cache = nullptr) {
  if (mode == Mode::Infer && !cache) return batchnorm_infer(x, layer);
  require_shape(x.channels == layer.channels, "batchnorm: channel count mismatch");
  const std::size_t C = x.channels, L = x.length, B = x.batch;
  const std::size_t M = B * L;
  Tensor3<T> y(B, C, L);
  if (cache) {
    cache->xhat.assign(x.data.size(), T(0));
    cache->inv_std.assign(C, T(0));
  }
  for (std::size_t c = 0; c < C; ++c) {
    T mean, inv_std;
    if (mode == Mode::Train) {
      require_shape(M >= 2, "batchnorm: train mode needs batch x length >= 2");
      double s = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < L; ++t) s += x(b, c, t);
      const double mu = s / static_cast<double>(M);
      double ss = 0.0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < L; ++t) {
          const double d = x(b, c, t) - mu;
          ss += d * d;
        }
      const double var = ss / static_cast<double>(M);
      mean = static_cast<T>(mu);
      inv_std = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(layer.eps)));
      const T m = layer.momentum;
      layer.running_mean[c] = (T(1) - m) * layer.running_mean[c] + m * mean;
      layer.running_var[c] =
          (T(1) - m) * layer.running_var[c] + m * static_cast<T>(ss / static_cast<double>(M - 1));
    } else {
      mean = layer.running_mean[c];
      inv_std = T(1) / std::sqrt(layer.running_var[c] + layer.eps);
    }
    const T g = layer.gamma[c], be = layer.beta[c];
    for (std::size_t b = 0; b < B; ++b) {
      const T* src = &x(b, c, 0);
      T* dst = &y(b, c, 0);
      T* xh = cache ? cache->xhat.data() + (b * C + c) * L : nullptr;
      for (std::size_t t = 0; t < L; ++t) {
        const T n = (src[t] - mean) * inv_std;
        if (xh) xh[t] = n;
        dst[t] = g * n + be;
      }
    }
    if (cache) cache->inv_std[c] = inv_std;
  }
  return y;
}

/// Backward through train-mode batch norm; accumulates gamma/beta gradients.
template <typename T>
Tensor3<T> batchnorm_backward(const Tensor3<T>& dy, const BatchNormLayer<T>& layer, const BatchNormCache<T>& cache,
                              BatchNormLayer<T>& grad) {
  const std::size_t C = dy.channels, L = dy.length, B = dy.batch;
  const double M = static_cast<double>(B * L);
  Tensor3<T> dx(B, C, L);
  for (std::size_t c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const T* g = &dy(b, c, 0);
      const T* xh = cache.xhat.data() + (b * C + c) * L;
      for (std::size_t t = 0; t < L; ++t) {
        sum_dy += g[t];
        sum_dy_xhat += static_cast<double>(g[t]) * xh[t];
      }
    }
    grad.gamma[c] += static_cast<T>(sum_dy_xhat);
    grad.beta[c] += static_cast<T>(sum_dy);
    const T scale = layer.gamma[c] * cache.inv_std[c] / static_cast<T>(M);
    const T mean_dy = static_cast<T>(sum_dy);
    const T mean_dyx = static_cast<T>(sum_dy_xhat);
    for (std::size_t b = 0; b < B; ++b) {
      const T* g = &dy(b, c, 0);
      const T* xh = cache.xhat.data() + (b * C + c) * L;
      T* out = &dx(b, c, 0);
      for (std::size_t t = 0; t < L; ++t) out[t] = scale * (static_cast<T>(M) * g[t] - mean_dy - xh[t] * mean_dyx);
    }
  }
  return dx;
}

template <typename T>
void relu_inplace(Tensor3<T>& x) noexcept {
  for (auto& v : x.data) v = v < T(0) ? T(0) : v;  // NaN passes through so divergence stays visible
}

// dy masked by the post-activation output (y > 0).
template <typename T>
void relu_backward_inplace(Tensor3<T>& dy, const Tensor3<T>& y) noexcept {
  for (std::size_t i = 0; i < dy.data.size(); ++i)
    if (!(y.data[i] > T(0))) dy.data[i] = T(0);
}

}  // namespace fsc::nn
