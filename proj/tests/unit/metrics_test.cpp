#include "fsc/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace fsc;
using namespace fsc::metrics;

TEST(Confusion, DirectCount) {
  const std::vector<std::size_t> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  EXPECT_EQ(confusion(t, p, 2), (ConfusionMatrix{{1, 1}, {0, 2}}));
}

TEST(Confusion, PerfectIsDiagonalAndEmptyIsZero) {
  const std::vector<std::size_t> t{2, 0, 1, 2};
  EXPECT_EQ(confusion(t, t, 3), (ConfusionMatrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 2}}));
  EXPECT_EQ(confusion({}, {}, 2), (ConfusionMatrix{{0, 0}, {0, 0}}));
}

TEST(Confusion, LabelOutOfRange) {
  const std::vector<std::size_t> t{0, 3}, p{0, 1};
  try {
    confusion(t, p, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelOutOfRange);
  }
}

TEST(Metrics, WorkedExample) {
  const auto m = compute_metrics({{2, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.precision[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.precision[1], 1.0);
  EXPECT_DOUBLE_EQ(m.recall[0], 1.0);
  EXPECT_DOUBLE_EQ(m.recall[1], 0.5);
  EXPECT_DOUBLE_EQ(m.macro_precision, (2.0 / 3.0 + 1.0) / 2);
  EXPECT_DOUBLE_EQ(m.macro_recall, 0.75);
}

TEST(Metrics, DiagonalIsPerfect) {
  const auto m = compute_metrics({{3, 0, 0}, {0, 1, 0}, {0, 0, 5}});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.macro_precision, 1.0);
  EXPECT_EQ(m.macro_recall, 1.0);
}

TEST(Metrics, NeverPredictedClassHasZeroPrecision) {
  const auto m = compute_metrics({{2, 0}, {2, 0}});
  EXPECT_EQ(m.precision[1], 0.0);
  EXPECT_EQ(m.never_predicted, std::vector<std::size_t>{1});
  EXPECT_DOUBLE_EQ(m.macro_precision, 0.25);
}

TEST(Metrics, AbsentClassExcludedFromMacros) {
  const auto m = compute_metrics({{2, 0, 0}, {0, 0, 0}, {0, 0, 2}});
  EXPECT_EQ(m.absent, std::vector<std::size_t>{1});
  EXPECT_EQ(m.macro_recall, 1.0);
  EXPECT_EQ(m.macro_precision, 1.0);
}

TEST(Metrics, EmptyConfusion) {
  try {
    compute_metrics({{0, 0}, {0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyConfusion);
  }
}

TEST(Metrics, RandomPredictionsObeyInvariants) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t C = 2 + rng() % 6, n = 1 + rng() % 100;
    std::vector<std::size_t> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng() % C;
      p[i] = rng() % 3 == 0 ? t[i] : rng() % C;
    }
    const auto cm = confusion(t, p, C);
    std::uint64_t total = 0, trace = 0;
    for (std::size_t i = 0; i < C; ++i) {
      trace += cm[i][i];
      for (auto v : cm[i]) total += v;
    }
    ASSERT_EQ(total, n);
    const auto m = compute_metrics(cm);
    // Micro-averaged recall (correct / items) equals accuracy.
    ASSERT_DOUBLE_EQ(m.accuracy, static_cast<double>(trace) / static_cast<double>(n));
    for (std::size_t c = 0; c < C; ++c) {
      ASSERT_GE(m.precision[c], 0.0);
      ASSERT_LE(m.precision[c], 1.0);
      ASSERT_GE(m.recall[c], 0.0);
      ASSERT_LE(m.recall[c], 1.0);
    }
    // Permuting the item order changes nothing.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> t2(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) t2[i] = t[idx[i]], p2[i] = p[idx[i]];
    ASSERT_EQ(confusion(t2, p2, C), cm);
  }
}

TEST(RealtimeFactor, Examples) {
  EXPECT_NEAR(realtime_factor(1818, 3000, 30, 13), 13984.6, 0.1);
  EXPECT_DOUBLE_EQ(realtime_factor(1, 30, 30, 1), 1.0);
  EXPECT_DOUBLE_EQ(realtime_factor(10, 300, 30, 4), 2 * realtime_factor(10, 300, 30, 8));
  EXPECT_DOUBLE_EQ(realtime_factor(20, 300, 30, 4), 2 * realtime_factor(10, 300, 30, 4));
  EXPECT_THROW(realtime_factor(1, 1, 30, 0), Error);
}

TEST(Report, CarriesFormulaInputs) {
  const std::vector<std::size_t> t{0, 1, 1}, p{0, 1, 0};
  const auto r = make_report({"a", "b"}, t, p, 0.5, 120, 30);
  EXPECT_EQ(r.items, 3u);
  EXPECT_EQ(r.frames_processed, 360u);
  EXPECT_DOUBLE_EQ(r.real_time_factor, (3 * 120 / 30.0) / 0.5);
  EXPECT_NEAR(r.metrics.accuracy, 2.0 / 3.0, 1e-12);
}
