#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fsc/dataset.hpp"
#include "fsc/error.hpp"

namespace fsc::stats {

struct SizeHistogram {
  std::vector<double> bin_edges;  // B + 1 ascending
  std::vector<double> probs;      // B, sums to 1
};

inline std::vector<double> equal_width_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0) fail(ErrorCode::InvalidArgument, "bin count must be >= 1");
  if (!(hi > lo)) hi = lo + 1.0;
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  edges.back() = hi;
  return edges;
}

/// Normalized counts; samples outside the edge range clamp into the end bins.
/// Bins are half-open [e_i, e_{i+1}) except the last, which is closed.
template <typename T>
SizeHistogram histogram(std::span<const T> sizes, std::span<const double> bin_edges) {
  if (sizes.empty()) fail(ErrorCode::EmptyInput, "histogram of an empty sample");
  if (bin_edges.size() < 2) fail(ErrorCode::InvalidArgument, "need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (!(bin_edges[i] > bin_edges[i - 1])) fail(ErrorCode::InvalidArgument, "bin edges must be strictly ascending");

  const std::size_t bins = bin_edges.size() - 1;
  std::vector<std::uint64_t> counts(bins, 0);
  for (const T s : sizes) {
    const double v = static_cast<double>(s);
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
    std::ptrdiff_t b = (it - bin_edges.begin()) - 1;
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  SizeHistogram h;
  h.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  h.probs.resize(bins);
  const double total = static_cast<double>(sizes.size());
  for (std::size_t i = 0; i < bins; ++i) h.probs[i] = static_cast<double>(counts[i]) / total;
  return h;
}

inline constexpr double kDefaultKldEpsilon = 1e-10;

/// KL(p || q) in nats after adding epsilon to every bin and renormalizing.
inline double kld(const SizeHistogram& p, const SizeHistogram& q, double epsilon = kDefaultKldEpsilon) {
  if (p.bin_edges != q.bin_edges || p.probs.size() != q.probs.size())
    fail(ErrorCode::BinMismatch, "histograms have different bin edges");
  if (!(epsilon > 0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  const std::size_t n = p.probs.size();
  double zp = 0.0, zq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zp += p.probs[i] + epsilon;
    zq += q.probs[i] + epsilon;
  }
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = (p.probs[i] + epsilon) / zp;
    const double qi = (q.probs[i] + epsilon) / zq;
    d += pi * std::log(pi / qi);
  }
  return std::max(d, 0.0);
}

struct KldMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<double>> values;  // values[i][j] = KL(class i || class j)

  std::vector<double> diagonal() const {
    std::vector<double> d;
    for (std::size_t i = 0; i < values.size(); ++i) d.push_back(values[i][i]);
    return d;
  }
  std::vector<double> off_diagonal() const {
    std::vector<double> d;
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t j = 0; j < values.size(); ++j)
        if (i != j) d.push_back(values[i][j]);
    return d;
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline constexpr std::size_t kDefaultBins = 64;

/// Inter-class KLD off the diagonal. The diagonal compares the pooled sizes of
/// two seeded halves of the class's items. All histograms share equal-width
/// bins spanning the pooled min..max.
inline KldMatrix class_kld_matrix(const LabeledDataset& ds, std::size_t bins = kDefaultBins, std::uint64_t seed = 0) {
  validate(ds);
  const std::size_t C = ds.num_classes();
  std::vector<std::vector<std::uint64_t>> pooled(C);
  std::vector<std::vector<std::size_t>> members(C);
  for (std::size_t i = 0; i < ds.items.size(); ++i) members[ds.items[i].label].push_back(i);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t c = 0; c < C; ++c) {
    if (members[c].size() < 2)
      fail(ErrorCode::ClassTooSmall, "class '" + ds.class_names[c] + "' needs at least 2 items for split-half KLD");
    for (auto i : members[c]) {
      const auto& s = ds.items[i].series.sizes;
      pooled[c].insert(pooled[c].end(), s.begin(), s.end());
      for (auto v : s) {
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
      }
    }
    if (pooled[c].size() < 2) fail(ErrorCode::ClassTooSmall, "class '" + ds.class_names[c] + "' has fewer than 2 frames");
  }
  const auto edges = equal_width_edges(lo, hi, bins);

  std::vector<SizeHistogram> hists;
  hists.reserve(C);
  for (std::size_t c = 0; c < C; ++c) hists.push_back(histogram<std::uint64_t>(pooled[c], edges));

  KldMatrix m;
  m.class_names = ds.class_names;
  m.values.assign(C, std::vector<double>(C, 0.0));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = 0; j < C; ++j)
      if (i != j) m.values[i][j] = kld(hists[i], hists[j]);
    std::vector<std::size_t> order = members[i];
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t half = order.size() / 2;
    std::vector<std::uint64_t> first, second;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& s = ds.items[order[k]].series.sizes;
      auto& dst = k < half ? first : second;
      dst.insert(dst.end(), s.begin(), s.end());
    }
    m.values[i][i] = kld(histogram<std::uint64_t>(first, edges), histogram<std::uint64_t>(second, edges));
  }
  return m;
}

}  // namespace fsc::stats
