#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fsc/nn/layers.hpp"

namespace fsc::nn {

/// Filter counts per residual block and the kernel widths of the three
/// convolutions inside every block.
struct Architecture {
  std::vector<std::size_t> filters{256, 512, 512};
  std::vector<std::size_t> kernels{8, 5, 3};

  std::size_t min_input_length() const { return *std::max_element(kernels.begin(), kernels.end()); }
  bool operator==(const Architecture&) const = default;
};

/// Three conv-BN(-ReLU) stages plus a shortcut: identity when channel counts
/// match, otherwise a 1x1 convolution followed by batch norm.
template <typename T>
struct ResidualBlock {
  ConvLayer<T> conv1, conv2, conv3;
  BatchNormLayer<T> bn1, bn2, bn3;
  bool projection = false;
  ConvLayer<T> shortcut_conv;
  BatchNormLayer<T> shortcut_bn;

  ResidualBlock() = default;
  ResidualBlock(std::size_t in, std::size_t out, std::span<const std::size_t> kernels)
      : conv1(in, out, kernels[0]),
        conv2(out, out, kernels[1]),
        conv3(out, out, kernels[2]),
        bn1(out),
        bn2(out),
        bn3(out),
        projection(in != out) {
    if (projection) {
      shortcut_conv = ConvLayer<T>(in, out, 1);
      shortcut_bn = BatchNormLayer<T>(out);
    }
  }

  std::size_t in_channels() const noexcept { return conv1.in_ch; }
  std::size_t out_channels() const noexcept { return conv3.out_ch; }
};

/// Preprocessing the model was trained with; travels in the weight file.
struct InputSpec {
  std::size_t n_frames = 0;  // 0 = unspecified
  bool znorm = true;
  bool operator==(const InputSpec&) const = default;
};

template <typename T>
struct Model {
  Architecture arch;
  InputSpec input;
  std::vector<ResidualBlock<T>> blocks;
  std::size_t num_classes = 0;
  std::vector<T> head_weight;  // (num_classes, last filter count)
  std::vector<T> head_bias;    // num_classes
  std::vector<std::string> class_names;

  std::size_t feature_width() const noexcept { return blocks.empty() ? 0 : blocks.back().out_channels(); }
};

/// Allocates a model with zeroed parameters (BN gammas 1, running var 1).
template <typename T>
Model<T> make_model(const Architecture& arch, std::vector<std::string> class_names) {
  if (arch.filters.empty()) fail(ErrorCode::InvalidArgument, "architecture needs at least one block");
  if (arch.kernels.size() != 3) fail(ErrorCode::InvalidArgument, "each block has exactly three kernels");
  for (auto f : arch.filters)
    if (f == 0) fail(ErrorCode::InvalidArgument, "filter counts must be >= 1");
  for (auto k : arch.kernels)
    if (k == 0) fail(ErrorCode::InvalidArgument, "kernel widths must be >= 1");
  if (class_names.size() < 2) fail(ErrorCode::InvalidArgument, "a classifier needs at least two classes");

  Model<T> m;
  m.arch = arch;
  std::size_t in = 1;
  for (auto f : arch.filters) {
    m.blocks.emplace_back(in, f, arch.kernels);
    in = f;
  }
  m.num_classes = class_names.size();
  m.class_names = std::move(class_names);
  m.head_weight.assign(m.num_classes * in, T(0));
  m.head_bias.assign(m.num_classes, T(0));
  return m;
}

/// Seeded He-uniform convolution weights, uniform +-1/sqrt(fan_in) head
/// weights, zero biases and betas, unit gammas.
template <typename T>
void initialize(Model<T>& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& b : m.blocks) {
    he_uniform_init(b.conv1, rng);
    he_uniform_init(b.conv2, rng);
    he_uniform_init(b.conv3, rng);
    if (b.projection) he_uniform_init(b.shortcut_conv, rng);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.feature_width()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& w : m.head_weight) w = static_cast<T>(dist(rng));
  std::fill(m.head_bias.begin(), m.head_bias.end(), T(0));
}

template <typename T>
Model<T> make_initialized_model(const Architecture& arch, std::vector<std::string> class_names, std::uint64_t seed) {
  auto m = make_model<T>(arch, std::move(class_names));
  initialize(m, seed);
  return m;
}

// Parameter enumeration. Both visitors walk layers in declaration order:
// per block conv1, bn1, conv2, bn2, conv3, bn3, [shortcut conv, shortcut bn],
// then the dense head. `visit_trainable` yields weights, biases, gammas and
// betas; `visit_state` additionally yields BN running statistics and is the
// order used by the weight file.
template <typename M, typename F>
void visit_trainable(M& m, F&& f) {
  auto conv = [&](auto& c) {
    f(std::span(c.weight));
    f(std::span(c.bias));
  };
  auto bn = [&](auto& b) {
    f(std::span(b.gamma));
    f(std::span(b.beta));
  };
  for (auto& b : m.blocks) {
    conv(b.conv1), bn(b.bn1), conv(b.conv2), bn(b.bn2), conv(b.conv3), bn(b.bn3);
    if (b.projection) conv(b.shortcut_conv), bn(b.shortcut_bn);
  }
  f(std::span(m.head_weight));
  f(std::span(m.head_bias));
}

template <typename M, typename F>
void visit_state(M& m, F&& f) {
  auto conv = [&](auto& c) {
    f(std::span(c.weight));
    f(std::span(c.bias));
  };
  auto bn = [&](auto& b) {
    f(std::span(b.gamma));
    f(std::span(b.beta));
    f(std::span(b.running_mean));
    f(std::span(b.running_var));
  };
  for (auto& b : m.blocks) {
    conv(b.conv1), bn(b.bn1), conv(b.conv2), bn(b.bn2), conv(b.conv3), bn(b.bn3);
    if (b.projection) conv(b.shortcut_conv), bn(b.shortcut_bn);
  }
  f(std::span(m.head_weight));
  f(std::span(m.head_bias));
}

template <typename T>
std::vector<std::span<T>> trainable_parameters(Model<T>& m) {
  std::vector<std::span<T>> out;
  visit_trainable(m, [&](std::span<T> s) { out.push_back(s); });
  return out;
}

template <typename T>
std::size_t parameter_count(const Model<T>& m) {
  std::size_t n = 0;
  visit_trainable(m, [&](auto s) { n += s.size(); });
  return n;
}

/// Gradient holder with the model's shapes, all zeros.
template <typename T>
Model<T> zeros_like(const Model<T>& m) {
  Model<T> g = m;
  visit_state(g, [](std::span<T> s) { std::fill(s.begin(), s.end(), T(0)); });
  return g;
}

template <typename T>
struct BlockCache {
  Tensor3<T> input, h1, h2, out;
  BatchNormCache<T> bn1, bn2, bn3, shortcut_bn;
};

template <typename T>
struct ForwardCache {
  std::vector<BlockCache<T>> blocks;
  Matrix<T> features;  // (batch, feature_width) after global average pooling
  Matrix<T> probs;     // (batch, num_classes)
};

namespace detail {

template <typename T>
Tensor3<T> block_forward(ResidualBlock<T>& b, const Tensor3<T>& x, Mode mode, BlockCache<T>* cache) {
  auto h1 = batchnorm_forward(conv1d_forward(x, b.conv1), b.bn1, mode, cache ? &cache->bn1 : nullptr);
  relu_inplace(h1);
  auto h2 = batchnorm_forward(conv1d_forward(h1, b.conv2), b.bn2, mode, cache ? &cache->bn2 : nullptr);
  relu_inplace(h2);
  auto out = batchnorm_forward(conv1d_forward(h2, b.conv3), b.bn3, mode, cache ? &cache->bn3 : nullptr);
  if (b.projection) {
    const auto s = batchnorm_forward(conv1d_forward(x, b.shortcut_conv), b.shortcut_bn, mode,
                                     cache ? &cache->shortcut_bn : nullptr);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += s.data[i];
  } else {
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += x.data[i];
  }
  relu_inplace(out);
  if (cache) {
    cache->input = x;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->out = out;
  }
  return out;
}

template <typename T>
Tensor3<T> block_infer(const ResidualBlock<T>& b, const Tensor3<T>& x) {
  auto h = batchnorm_infer(conv1d_forward(x, b.conv1), b.bn1);
  relu_inplace(h);
  h = batchnorm_infer(conv1d_forward(h, b.conv2), b.bn2);
  relu_inplace(h);
  auto out = batchnorm_infer(conv1d_forward(h, b.conv3), b.bn3);
  if (b.projection) {
    const auto s = batchnorm_infer(conv1d_forward(x, b.shortcut_conv), b.shortcut_bn);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += s.data[i];
  } else {
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += x.data[i];
  }
  relu_inplace(out);
  return out;
}

template <typename T>
Tensor3<T> block_backward(const ResidualBlock<T>& b, const BlockCache<T>& cache, Tensor3<T> dout,
                          ResidualBlock<T>& g) {
  relu_backward_inplace(dout, cache.out);
  // dout now holds dL/d(main + shortcut); both branches receive it.
  auto d = batchnorm_backward(dout, b.bn3, cache.bn3, g.bn3);
  d = conv1d_backward(cache.h2, b.conv3, d, g.conv3);
  relu_backward_inplace(d, cache.h2);
  d = batchnorm_backward(d, b.bn2, cache.bn2, g.bn2);
  d = conv1d_backward(cache.h1, b.conv2, d, g.conv2);
  relu_backward_inplace(d, cache.h1);
  d = batchnorm_backward(d, b.bn1, cache.bn1, g.bn1);
  auto dx = conv1d_backward(cache.input, b.conv1, d, g.conv1);
  if (b.projection) {
    auto ds = batchnorm_backward(dout, b.shortcut_bn, cache.shortcut_bn, g.shortcut_bn);
    ds = conv1d_backward(cache.input, b.shortcut_conv, ds, g.shortcut_conv);
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += ds.data[i];
  } else {
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dout.data[i];
  }
  return dx;
}

}  // namespace detail

/// Row-wise softmax of `logits` in place (max-shifted).
template <typename T>
void softmax_rows(Matrix<T>& logits) {
  for (std::size_t r = 0; r < logits.rows; ++r) {
    T* row = logits.data.data() + r * logits.cols;
    const T mx = *std::max_element(row, row + logits.cols);
    double z = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      z += row[c];
    }
    for (std::size_t c = 0; c < logits.cols; ++c) row[c] = static_cast<T>(row[c] / z);
  }
}

namespace detail {

template <typename T>
Matrix<T> head_forward(const Model<T>& m, const Tensor3<T>& last, Matrix<T>& features) {
  const std::size_t B = last.batch, F = last.channels, C = m.num_classes;
  features = Matrix<T>(B, F);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t f = 0; f < F; ++f) {
      const T* p = &last(b, f, 0);
      double s = 0.0;
      for (std::size_t t = 0; t < last.length; ++t) s += p[t];
      features(b, f) = static_cast<T>(s / static_cast<double>(last.length));
    }
  Matrix<T> logits(B, C);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      T s = m.head_bias[c];
      const T* w = m.head_weight.data() + c * F;
      for (std::size_t f = 0; f < F; ++f) s += w[f] * features(b, f);
      logits(b, c) = s;
    }
  softmax_rows(logits);
  return logits;
}

template <typename T>
void check_input(const Model<T>& m, const Tensor3<T>& x) {
  require_shape(x.channels == 1, "model input must have exactly one channel");
  require_shape(x.length >= m.arch.min_input_length(),
                "input length " + std::to_string(x.length) + " is shorter than the minimum " +
                    std::to_string(m.arch.min_input_length()));
}

}  // namespace detail

/// Class probabilities (batch x C). Train mode uses batch statistics, updates
/// BN running stats and, when `cache` is given, records what backward needs.
template <typename T>
Matrix<T> model_forward(Model<T>& m, const Tensor3<T>& x, Mode mode, ForwardCache<T>* cache = nullptr) {
  detail::check_input(m, x);
  if (cache) cache->blocks.resize(m.blocks.size());
  Tensor3<T> h = x;
  for (std::size_t i = 0; i < m.blocks.size(); ++i)
    h = detail::block_forward(m.blocks[i], h, mode, cache ? &cache->blocks[i] : nullptr);
  Matrix<T> features;
  auto probs = detail::head_forward(m, h, features);
  if (cache) {
    cache->features = std::move(features);
    cache->probs = probs;
  }
  return probs;
}

/// Inference on a shared, immutable model.
template <typename T>
Matrix<T> predict_proba(const Model<T>& m, const Tensor3<T>& x) {
  detail::check_input(m, x);
  Tensor3<T> h = x;
  for (const auto& b : m.blocks) h = detail::block_infer(b, h);
  Matrix<T> features;
  return detail::head_forward(m, h, features);
}

/// Mean over the batch of -ln p(true class), probabilities clamped to 1e-12.
template <typename T>
double cross_entropy(const Matrix<T>& probs, std::span<const std::size_t> targets) {
  require_shape(probs.rows == targets.size() && probs.rows > 0, "cross_entropy: batch size mismatch");
  double loss = 0.0;
  for (std::size_t b = 0; b < probs.rows; ++b) {
    if (targets[b] >= probs.cols) fail(ErrorCode::ShapeMismatch, "cross_entropy: target out of range");
    loss -= std::log(std::max(static_cast<double>(probs(b, targets[b])), 1e-12));
  }
  return loss / static_cast<double>(probs.rows);
}

/// Analytic gradients of mean cross-entropy for the batch recorded in `cache`
/// (written into `grads`, which is zeroed first).
template <typename T>
void model_backward(const Model<T>& m, const ForwardCache<T>& cache, std::span<const std::size_t> targets,
                    Model<T>& grads) {
  const auto& probs = cache.probs;
  const std::size_t B = probs.rows, C = m.num_classes, F = m.feature_width();
  require_shape(targets.size() == B && cache.blocks.size() == m.blocks.size(), "model_backward: cache mismatch");
  visit_state(grads, [](std::span<T> s) { std::fill(s.begin(), s.end(), T(0)); });

  Matrix<T> dlogits(B, C);
  for (std::size_t b = 0; b < B; ++b) {
    if (targets[b] >= C) fail(ErrorCode::ShapeMismatch, "model_backward: target out of range");
    for (std::size_t c = 0; c < C; ++c)
      dlogits(b, c) = (probs(b, c) - (c == targets[b] ? T(1) : T(0))) / static_cast<T>(B);
  }
  Matrix<T> dfeat(B, F);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c) {
      const T g = dlogits(b, c);
      grads.head_bias[c] += g;
      T* gw = grads.head_weight.data() + c * F;
      const T* w = m.head_weight.data() + c * F;
      for (std::size_t f = 0; f < F; ++f) {
        gw[f] += g * cache.features(b, f);
        dfeat(b, f) += g * w[f];
      }
    }

  const auto& last = cache.blocks.back().out;
  Tensor3<T> d(B, F, last.length);
  const T inv_len = T(1) / static_cast<T>(last.length);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t f = 0; f < F; ++f) std::fill_n(&d(b, f, 0), last.length, dfeat(b, f) * inv_len);

  for (std::size_t i = m.blocks.size(); i-- > 0;)
    d = detail::block_backward(m.blocks[i], cache.blocks[i], std::move(d), grads.blocks[i]);
}

/// Packs equal-length vectors into a (batch, 1, N) tensor.
template <typename T>
Tensor3<T> make_batch(std::span<const std::vector<double>> rows) {
  require_shape(!rows.empty(), "empty batch");
  const std::size_t n = rows.front().size();
  Tensor3<T> x(rows.size(), 1, n);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    require_shape(rows[b].size() == n, "batch rows have different lengths");
    for (std::size_t t = 0; t < n; ++t) x(b, 0, t) = static_cast<T>(rows[b][t]);
  }
  return x;
}

struct Prediction {
  std::size_t class_index = 0;
  std::string class_name;
  std::vector<double> probabilities;  // class_names order
};

/// Argmax with ties resolved to the lowest class index.
template <typename T>
Prediction predict(const Model<T>& m, std::span<const double> x) {
  const std::vector<std::vector<double>> rows{std::vector<double>(x.begin(), x.end())};
  const auto probs = predict_proba(m, make_batch<T>(rows));
  Prediction p;
  p.probabilities.assign(probs.data.begin(), probs.data.end());
  for (std::size_t c = 1; c < m.num_classes; ++c)
    if (p.probabilities[c] > p.probabilities[p.class_index]) p.class_index = c;
  p.class_name = m.class_names[p.class_index];
  return p;
}

template <typename T>
std::size_t argmax_row(const Matrix<T>& probs, std::size_t r) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.cols; ++c)
    if (probs(r, c) > probs(r, best)) best = c;
  return best;
}

}  // namespace fsc::nn
