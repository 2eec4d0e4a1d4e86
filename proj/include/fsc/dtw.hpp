#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fsc/error.hpp"

namespace fsc::dtw {

struct DtwConfig {
  std::optional<std::size_t> window;  // Sakoe-Chiba radius; nullopt = unconstrained
};

/// Classic DTW with |a_i - b_j| point cost:
///   D(i,j) = |a_i - b_j| + min(D(i-1,j), D(i,j-1), D(i-1,j-1)).
/// Two rolling rows sized to the shorter input.
inline double dtw_distance(std::span<const double> a, std::span<const double> b, const DtwConfig& cfg = {}) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptyInput, "dtw of an empty series");
  if (b.size() > a.size()) std::swap(a, b);  // rows over a, columns over the shorter b
  const std::size_t n = a.size(), m = b.size();
  const std::size_t w = cfg.window ? *cfg.window : std::max(n, m);
  if (n - m > w) fail(ErrorCode::BandInfeasible, "length difference exceeds the warping window");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m, inf), cur(m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(m - 1, i + w);
    std::fill(cur.begin(), cur.end(), inf);
    for (std::size_t j = lo; j <= hi; ++j) {
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, cur[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      cur[j] = std::abs(a[i] - b[j]) + best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

/// k-NN vote over DTW distances. Distance ties keep the earlier reference,
/// vote ties go to the smallest class index.
inline std::size_t knn_classify(std::span<const std::vector<double>> references, std::span<const std::size_t> labels,
                                std::span<const double> query, std::size_t k = 1, const DtwConfig& cfg = {}) {
  if (references.empty()) fail(ErrorCode::EmptyDataset, "k-NN needs at least one reference series");
  if (labels.size() != references.size()) fail(ErrorCode::InvalidArgument, "labels/references size mismatch");
  if (k < 1 || k > references.size()) fail(ErrorCode::InvalidArgument, "k must be in [1, reference count]");

  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(references.size());
  for (std::size_t i = 0; i < references.size(); ++i) dist.emplace_back(dtw_distance(query, references[i], cfg), i);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  const std::size_t num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> votes(num_classes, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[labels[dist[i].second]];
  return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace fsc::dtw
