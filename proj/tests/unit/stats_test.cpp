#include "fsc/stats.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fsc/datagen.hpp"

using namespace fsc;
using namespace fsc::stats;

namespace {

SizeHistogram hist_of(std::vector<double> probs) {
  SizeHistogram h;
  h.probs = std::move(probs);
  h.bin_edges = equal_width_edges(0, 1, h.probs.size());
  return h;
}

LabeledDataset from_sampler(std::size_t classes, std::size_t items, std::size_t frames,
                            const std::function<std::uint64_t(std::size_t, std::mt19937_64&)>& draw) {
  std::mt19937_64 rng(17);
  LabeledDataset ds;
  for (std::size_t c = 0; c < classes; ++c) {
    ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < items; ++i) {
      FrameSizeSeries s;
      for (std::size_t f = 0; f < frames; ++f) s.sizes.push_back(draw(c, rng));
      ds.items.push_back({std::move(s), c});
    }
  }
  return ds;
}

}  // namespace

TEST(Histogram, DirectCountExample) {
  const std::vector<std::uint64_t> sizes{1, 1, 3};
  const std::vector<double> edges{0, 2, 4};
  const auto h = histogram<std::uint64_t>(sizes, edges);
  ASSERT_EQ(h.probs.size(), 2u);
  EXPECT_DOUBLE_EQ(h.probs[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h.probs[1], 1.0 / 3.0);
}

TEST(Histogram, SingleBinAndClosedUpperEdge) {
  const std::vector<double> edges{0, 1, 2, 3};
  const auto h = histogram<double>(std::vector<double>{3, 3, 3}, edges);
  EXPECT_EQ(h.probs, (std::vector<double>{0, 0, 1}));
  const auto lo = histogram<double>(std::vector<double>{-5, 0.5}, edges);
  EXPECT_EQ(lo.probs, (std::vector<double>{1, 0, 0}));
}

TEST(Histogram, UniformSamplesFillBinsEvenly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1000);
  std::vector<double> xs(1'000'000);
  for (auto& x : xs) x = u(rng);
  const auto h = histogram<double>(xs, equal_width_edges(0, 1000, 10));
  double total = 0;
  for (double p : h.probs) {
    EXPECT_NEAR(p, 0.1, 0.01);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Histogram, EmptySample) {
  try {
    histogram<double>(std::vector<double>{}, equal_width_edges(0, 1, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Kld, IdenticalIsZero) {
  const auto p = hist_of({0.25, 0.0, 0.5, 0.25});
  EXPECT_EQ(kld(p, p), 0.0);
}

TEST(Kld, HandComputedValues) {
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  EXPECT_NEAR(kld(hist_of({0.5, 0.5}), hist_of({0.9, 0.1})), expected, 1e-9);
  EXPECT_NEAR(kld(hist_of({0.5, 0.5}), hist_of({0.9, 0.1})), 0.5108, 1e-3);
  EXPECT_NEAR(kld(hist_of({1, 0}), hist_of({0.5, 0.5}), 1e-10), std::log(2.0), 1e-3);
}

TEST(Kld, NonNegativeAndAsymmetric) {
  std::mt19937_64 rng(21);
  std::exponential_distribution<double> e(1.0);
  bool saw_asymmetry = false;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<double> a(n), b(n);
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = (rng() % 4 == 0) ? 0.0 : e(rng);
      b[i] = (rng() % 4 == 0) ? 0.0 : e(rng);
      sa += a[i];
      sb += b[i];
    }
    if (sa == 0 || sb == 0) continue;
    for (auto& v : a) v /= sa;
    for (auto& v : b) v /= sb;
    const double ab = kld(hist_of(a), hist_of(b));
    const double ba = kld(hist_of(b), hist_of(a));
    ASSERT_GE(ab, 0.0);
    ASSERT_GE(ba, 0.0);
    saw_asymmetry |= std::abs(ab - ba) > 1e-6;
  }
  EXPECT_TRUE(saw_asymmetry);
}

TEST(Kld, MismatchedBins) {
  auto p = hist_of({0.5, 0.5});
  auto q = p;
  q.bin_edges[1] = 0.4;
  try {
    kld(p, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BinMismatch);
  }
}

TEST(ClassKld, SameDistributionClassesAreClose) {
  const auto ds = from_sampler(2, 8, 500, [](std::size_t, std::mt19937_64& r) {
    return std::uniform_int_distribution<std::uint64_t>(1000, 5000)(r);
  });
  const auto m = class_kld_matrix(ds);
  for (const auto& row : m.values)
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 0.1);
    }
}

TEST(ClassKld, DisjointRangesSeparateByTenfold) {
  const auto ds = from_sampler(3, 6, 400, [](std::size_t c, std::mt19937_64& r) {
    return std::uniform_int_distribution<std::uint64_t>(1000 + 10000 * c, 5000 + 10000 * c)(r);
  });
  const auto m = class_kld_matrix(ds);
  ASSERT_EQ(m.values.size(), 3u);
  for (double d : m.diagonal()) EXPECT_GT(d, 0.0);
  EXPECT_GE(median(m.off_diagonal()), 10.0 * median(m.diagonal()));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) EXPECT_GE(m.values[i][j], 10.0 * std::max(m.values[i][i], m.values[j][j]));
}

TEST(ClassKld, SingleClassGivesOneByOne) {
  const auto ds = from_sampler(1, 4, 300, [](std::size_t, std::mt19937_64& r) {
    return std::uniform_int_distribution<std::uint64_t>(100, 900)(r);
  });
  const auto m = class_kld_matrix(ds);
  ASSERT_EQ(m.values.size(), 1u);
  EXPECT_GT(m.values[0][0], 0.0);
  // Two halves of 600 samples over 64 bins carry sampling noise of roughly
  // (bins - 1) / 600 nats even when drawn from one distribution.
  EXPECT_LT(m.values[0][0], 3.0 * 63.0 / 600.0);
}

TEST(ClassKld, SeededDiagonal) {
  const auto ds = from_sampler(2, 6, 200, [](std::size_t c, std::mt19937_64& r) {
    return std::uniform_int_distribution<std::uint64_t>(100 * (c + 1), 900 * (c + 1))(r);
  });
  EXPECT_EQ(class_kld_matrix(ds, 64, 5).values, class_kld_matrix(ds, 64, 5).values);
}

TEST(ClassKld, OneItemClassIsTooSmall) {
  const auto ds = from_sampler(2, 1, 50, [](std::size_t, std::mt19937_64& r) { return r() % 100 + 1; });
  try {
    class_kld_matrix(ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClassTooSmall);
  }
}

TEST(ClassKld, GeneratedClassesShowLargeGap) {
  const auto ds = datagen::standard_benchmark(11, 10, 600, 1);
  const auto m = class_kld_matrix(ds);
  EXPECT_GE(median(m.off_diagonal()) / median(m.diagonal()), 10.0);
}

TEST(Median, OddEvenEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_TRUE(std::isnan(median({})));
}
