#include "fsc/datagen.hpp"

#include <gtest/gtest.h>

#include <set>
#include <tuple>

using namespace fsc;
using namespace fsc::datagen;

TEST(Generate, DeterministicPattern) {
  ClassProfile p{"flat", 4, 1000, 100, 50, 0.0, 0.0, false};
  const auto s = generate(p, 8, 1);
  EXPECT_EQ(s.sizes, (std::vector<std::uint64_t>{1000, 100, 100, 100, 1000, 100, 100, 100}));
  EXPECT_EQ(s.fps, 30.0);
}

TEST(Generate, BFramePattern) {
  ClassProfile p{"ibbp", 7, 900, 300, 100, 0.0, 0.0, true};
  const auto s = generate(p, 7, 1);
  EXPECT_EQ(s.sizes, (std::vector<std::uint64_t>{900, 100, 100, 300, 100, 100, 300}));
}

TEST(Generate, SameSeedSameSeries) {
  const auto p = standard_profiles()[3];
  EXPECT_EQ(generate(p, 500, 9).sizes, generate(p, 500, 9).sizes);
  EXPECT_NE(generate(p, 500, 9).sizes, generate(p, 500, 10).sizes);
}

TEST(Generate, SizeRatioFollowsProfile) {
  ClassProfile p{"ratio", 10, 50000, 5000, 5000, 0.3, 0.0, false};
  const auto s = generate(p, 10000, 4);
  double i_sum = 0, p_sum = 0;
  std::size_t i_n = 0, p_n = 0;
  for (std::size_t t = 0; t < s.sizes.size(); ++t) {
    if (t % 10 == 0) {
      i_sum += static_cast<double>(s.sizes[t]);
      ++i_n;
    } else {
      p_sum += static_cast<double>(s.sizes[t]);
      ++p_n;
    }
  }
  const double ratio = (i_sum / static_cast<double>(i_n)) / (p_sum / static_cast<double>(p_n));
  EXPECT_NEAR(ratio, 10.0, 2.0);
}

TEST(Generate, SceneChangesRestartGop) {
  ClassProfile p{"cuts", 50, 10000, 10, 10, 0.0, 0.2, false};
  const auto s = generate(p, 2000, 5);
  std::size_t since_i = 0, cuts = 0;
  for (std::size_t t = 0; t < s.sizes.size(); ++t) {
    const bool is_i = s.sizes[t] == 10000;
    if (is_i && since_i != 0 && since_i != 50) ++cuts;
    if (is_i) since_i = 0;
    ASSERT_LE(since_i, 49u);
    ++since_i;
  }
  EXPECT_GT(cuts, 100u);
}

TEST(Generate, PositiveSizesAndExactLength) {
  for (const auto& p : standard_profiles()) {
    const auto s = generate(p, 777, 2);
    ASSERT_EQ(s.length(), 777u);
    for (auto v : s.sizes) ASSERT_GE(v, 1u);
  }
}

TEST(Generate, BadProfiles) {
  ClassProfile p{"bad", 1, 1, 1, 1, 0, 0, false};
  EXPECT_THROW(generate(p, 10, 0), Error);
  p.gop_length = 4;
  p.scene_change_rate = 0.5;
  EXPECT_THROW(generate(p, 10, 0), Error);
  p.scene_change_rate = 0;
  p.p_size_mean = 0;
  EXPECT_THROW(generate(p, 10, 0), Error);
  p.p_size_mean = 1;
  EXPECT_THROW(generate(p, 3, 0), Error);
}

TEST(StandardBenchmark, CountsAndDeterminism) {
  const auto a = standard_benchmark(2, 10, 300, 7);
  EXPECT_EQ(a.size(), 20u);
  EXPECT_EQ(a.num_classes(), 2u);
  EXPECT_EQ(a.class_counts(), (std::vector<std::size_t>{10, 10}));
  const auto b = standard_benchmark(2, 10, 300, 7);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.items[i].series, b.items[i].series);
  EXPECT_THROW(standard_benchmark(12, 1, 300, 0), Error);
  EXPECT_THROW(standard_benchmark(1, 1, 300, 0), Error);
}

TEST(StandardBenchmark, ProfilesArePairwiseDistinct) {
  const auto ps = standard_profiles();
  ASSERT_EQ(ps.size(), 11u);
  std::set<std::tuple<std::size_t, double, double>> keys;
  std::set<std::string> names;
  for (const auto& p : ps) {
    validate(p);
    keys.insert({p.gop_length, p.i_size_mean / p.p_size_mean, p.scene_change_rate});
    names.insert(p.name);
  }
  EXPECT_EQ(keys.size(), 11u);
  EXPECT_EQ(names.size(), 11u);
}
