#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsc/error.hpp"

namespace fsc::metrics {

/// rows = true class, columns = predicted class
using ConfusionMatrix = std::vector<std::vector<std::uint64_t>>;

inline ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                 std::size_t num_classes) {
  if (truth.size() != predicted.size()) fail(ErrorCode::InvalidArgument, "truth/prediction lengths differ");
  ConfusionMatrix m(num_classes, std::vector<std::uint64_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= num_classes || predicted[i] >= num_classes)
      fail(ErrorCode::LabelOutOfRange, "label at position " + std::to_string(i) + " is out of range");
    ++m[truth[i]][predicted[i]];
  }
  return m;
}

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision;  // per class
  std::vector<double> recall;     // per class
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  std::vector<std::size_t> never_predicted;  // classes present in truth with a zero column
  std::vector<std::size_t> absent;           // classes with no true items (excluded from macros)
};

/// Accuracy = trace / total. Zero denominators give 0. Macro averages run
/// over the classes that have at least one true item.
inline Metrics compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t C = cm.size();
  std::uint64_t total = 0, trace = 0;
  std::vector<std::uint64_t> row(C, 0), col(C, 0);
  for (std::size_t t = 0; t < C; ++t) {
    if (cm[t].size() != C) fail(ErrorCode::InvalidArgument, "confusion matrix is not square");
    for (std::size_t p = 0; p < C; ++p) {
      row[t] += cm[t][p];
      col[p] += cm[t][p];
      total += cm[t][p];
    }
    trace += cm[t][t];
  }
  if (total == 0) fail(ErrorCode::EmptyConfusion, "confusion matrix has no entries");

  Metrics m;
  m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  m.precision.assign(C, 0.0);
  m.recall.assign(C, 0.0);
  double psum = 0.0, rsum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < C; ++c) {
    if (col[c] > 0) m.precision[c] = static_cast<double>(cm[c][c]) / static_cast<double>(col[c]);
    if (row[c] > 0) m.recall[c] = static_cast<double>(cm[c][c]) / static_cast<double>(row[c]);
    if (row[c] == 0) {
      m.absent.push_back(c);
      continue;
    }
    if (col[c] == 0) m.never_predicted.push_back(c);
    ++present;
    psum += m.precision[c];
    rsum += m.recall[c];
  }
  m.macro_precision = psum / static_cast<double>(present);
  m.macro_recall = rsum / static_cast<double>(present);
  return m;
}

/// Seconds of video processed per second of wall time.
inline double realtime_factor(double num_items, double frames_per_item, double fps, double wall_seconds) {
  if (!(num_items > 0 && frames_per_item > 0 && fps > 0 && wall_seconds > 0))
    fail(ErrorCode::InvalidArgument, "realtime_factor inputs must be positive");
  return (num_items * frames_per_item / fps) / wall_seconds;
}

struct EvalReport {
  std::vector<std::string> class_names;
  ConfusionMatrix confusion;
  Metrics metrics;
  double wall_time_seconds = 0.0;
  std::uint64_t frames_processed = 0;
  double fps = 30.0;
  double real_time_factor = 0.0;
  std::size_t items = 0;
};

inline EvalReport make_report(std::vector<std::string> class_names, std::span<const std::size_t> truth,
                              std::span<const std::size_t> predicted, double wall_seconds, std::size_t frames_per_item,
                              double fps) {
  EvalReport r;
  r.confusion = confusion(truth, predicted, class_names.size());
  r.class_names = std::move(class_names);
  r.metrics = compute_metrics(r.confusion);
  r.items = truth.size();
  r.wall_time_seconds = wall_seconds;
  r.frames_processed = static_cast<std::uint64_t>(truth.size()) * frames_per_item;
  r.fps = fps;
  if (wall_seconds > 0 && frames_per_item > 0 && fps > 0)
    r.real_time_factor = realtime_factor(static_cast<double>(truth.size()), static_cast<double>(frames_per_item), fps,
                                         wall_seconds);
  return r;
}

}  // namespace fsc::metrics
