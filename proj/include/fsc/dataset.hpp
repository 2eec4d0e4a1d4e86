#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fsc/error.hpp"
#include "fsc/series.hpp"

namespace fsc {

struct LabeledItem {
  FrameSizeSeries series;
  std::size_t label = 0;
};

/// Items plus the class-name table; a label is an index into class_names.
struct LabeledDataset {
  std::vector<LabeledItem> items;
  std::vector<std::string> class_names;

  std::size_t num_classes() const noexcept { return class_names.size(); }
  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (const auto& it : items) ++counts.at(it.label);
    return counts;
  }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.label);
    return out;
  }
};

/// Throws unless every label is in range and every class has an item.
inline void validate(const LabeledDataset& ds) {
  if (ds.class_names.empty()) fail(ErrorCode::EmptyDataset, "dataset has no classes");
  std::vector<std::size_t> counts(ds.num_classes(), 0);
  for (const auto& it : ds.items) {
    if (it.label >= ds.num_classes())
      fail(ErrorCode::LabelOutOfRange, "label " + std::to_string(it.label) + " >= class count");
    ++counts[it.label];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0) fail(ErrorCode::ClassTooSmall, "class '" + ds.class_names[c] + "' has no items");
}

inline std::vector<double> one_hot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes) fail(ErrorCode::LabelOutOfRange, "label out of range for one-hot encoding");
  std::vector<double> y(num_classes, 0.0);
  y[label] = 1.0;
  return y;
}

enum class Normalization { ZScore, None };
enum class WindowPolicy { Prefix, RandomOffset };

struct PreprocessSpec {
  std::size_t n_frames = 3000;
  Normalization normalization = Normalization::ZScore;
  WindowPolicy window_policy = WindowPolicy::Prefix;
  std::uint64_t seed = 0;  // RandomOffset only
};

/// Contiguous N-frame window as reals. RandomOffset draws the offset from
/// `seed` mixed with `salt` so each item gets its own offset.
inline std::vector<double> window(const FrameSizeSeries& series, const PreprocessSpec& spec, std::uint64_t salt = 0) {
  if (spec.n_frames == 0) fail(ErrorCode::InvalidArgument, "n_frames must be >= 1");
  if (series.length() < spec.n_frames)
    fail(ErrorCode::TooShort, "series '" + series.source_id + "' has " + std::to_string(series.length()) +
                                  " frames, need " + std::to_string(spec.n_frames));
  std::size_t offset = 0;
  if (spec.window_policy == WindowPolicy::RandomOffset) {
    std::mt19937_64 rng(spec.seed ^ (salt * 0x9E3779B97F4A7C15ULL));
    std::uniform_int_distribution<std::size_t> pick(0, series.length() - spec.n_frames);
    offset = pick(rng);
  }
  std::vector<double> out(spec.n_frames);
  for (std::size_t i = 0; i < spec.n_frames; ++i) out[i] = static_cast<double>(series.sizes[offset + i]);
  return out;
}

/// Mean 0, population std 1; constant inputs (std < 1e-12) map to zeros.
inline std::vector<double> znorm(std::span<const double> x) {
  if (x.empty()) fail(ErrorCode::EmptyInput, "znorm of an empty vector");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  std::vector<double> out(x.size(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

/// window() followed by the configured normalization.
inline std::vector<double> preprocess(const FrameSizeSeries& series, const PreprocessSpec& spec,
                                      std::uint64_t salt = 0) {
  auto w = window(series, spec, salt);
  if (spec.normalization == Normalization::ZScore) return znorm(w);
  return w;
}

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

/// Stratified, seeded three-way split. Per class with n items the counts are
/// round(n * val) and round(n * test), each at least 1, the rest go to train.
inline DatasetSplit split(const LabeledDataset& ds, const SplitFractions& f, std::uint64_t seed) {
  if (!(f.train > 0 && f.val > 0 && f.test > 0) || std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "split fractions must be positive and sum to 1");
  validate(ds);

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < ds.items.size(); ++i) by_class[ds.items[i].label].push_back(i);

  DatasetSplit out;
  out.train.class_names = out.val.class_names = out.test.class_names = ds.class_names;
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    const std::size_t n = idx.size();
    if (n < 3)
      fail(ErrorCode::ClassTooSmall,
           "class '" + ds.class_names[c] + "' has " + std::to_string(n) + " items, need at least 3");
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * f.val)));
    std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * f.test)));
    while (n_val + n_test > n - 1) (n_val >= n_test ? n_val : n_test) -= 1;
    // Keep stored order within each part stable for readability of manifests.
    std::vector<std::size_t> val(idx.begin(), idx.begin() + n_val);
    std::vector<std::size_t> test(idx.begin() + n_val, idx.begin() + n_val + n_test);
    std::vector<std::size_t> train(idx.begin() + n_val + n_test, idx.end());
    for (auto* part : {&train, &val, &test}) std::sort(part->begin(), part->end());
    for (auto i : train) out.train.items.push_back(ds.items[i]);
    for (auto i : val) out.val.items.push_back(ds.items[i]);
    for (auto i : test) out.test.items.push_back(ds.items[i]);
  }
  return out;
}

/// Copy of `ds` with every frame size multiplied by `factor` (rounded, >= 1).
inline LabeledDataset scale_sizes(const LabeledDataset& ds, double factor) {
  LabeledDataset out = ds;
  for (auto& it : out.items)
    for (auto& s : it.series.sizes)
      s = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(static_cast<double>(s) * factor)));
  return out;
}

/// Builds the class table from string labels, sorted so that independently
/// loaded manifests agree on indices.
inline std::vector<std::string> sorted_class_names(std::span<const std::string> labels) {
  std::vector<std::string> names(labels.begin(), labels.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

}  // namespace fsc
