#include "fsc/nn/serialize.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fsc::nn;

namespace {

Model<float> random_model(std::uint64_t seed) {
  auto m = make_initialized_model<float>(Architecture{{4, 6, 6}, {7, 5, 3}}, {"news", "gaming", "sports"}, seed);
  m.input = {120, true};
  // Non-default running statistics so they are exercised by the round trip.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.1f, 2.0f);
  for (auto& b : m.blocks)
    for (auto* bn : {&b.bn1, &b.bn2, &b.bn3}) {
      for (auto& v : bn->running_mean) v = u(rng) - 1.0f;
      for (auto& v : bn->running_var) v = u(rng);
      for (auto& v : bn->gamma) v = u(rng);
    }
  return m;
}

fsc::ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_model(bytes);
  } catch (const fsc::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode unexpectedly succeeded";
  return fsc::ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Serialize, RoundTripIsBitIdentical) {
  const auto m = random_model(1);
  const auto path = std::filesystem::temp_directory_path() / "fsc_serialize_roundtrip.bcnn";
  save_model(m, path);
  const auto back = load_model(path);
  std::filesystem::remove(path);

  EXPECT_EQ(back.class_names, m.class_names);
  EXPECT_EQ(back.arch, m.arch);
  EXPECT_EQ(back.input, m.input);
  std::vector<float> a, b;
  visit_state(m, [&](auto s) { a.insert(a.end(), s.begin(), s.end()); });
  visit_state(back, [&](auto s) { b.insert(b.end(), s.begin(), s.end()); });
  EXPECT_EQ(a, b);

  std::mt19937_64 rng(2);
  std::normal_distribution<float> g(0, 1);
  Tensor3<float> x(3, 1, 40);
  for (auto& v : x.data) v = g(rng);
  EXPECT_EQ(predict_proba(m, x).data, predict_proba(back, x).data);
}

TEST(Serialize, HeaderLayout) {
  const auto bytes = encode_model(random_model(3));
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "BCNN");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 3);  // class count, little-endian
}

TEST(Serialize, EveryTruncationFails) {
  const auto bytes = encode_model(random_model(4));
  for (std::size_t n = 0; n < bytes.size(); n += 1 + n / 8) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    const auto code = decode_error(cut);
    EXPECT_TRUE(code == fsc::ErrorCode::BadMagic || code == fsc::ErrorCode::IoFailure) << n;
  }
}

TEST(Serialize, TrailingBytesFail) {
  auto bytes = encode_model(random_model(5));
  bytes.push_back(0);
  EXPECT_EQ(decode_error(bytes), fsc::ErrorCode::IoFailure);
}

TEST(Serialize, BumpedVersion) {
  auto bytes = encode_model(random_model(6));
  bytes[4] = 2;
  EXPECT_EQ(decode_error(bytes), fsc::ErrorCode::VersionMismatch);
}

TEST(Serialize, WrongMagic) {
  auto bytes = encode_model(random_model(7));
  bytes[0] = 'X';
  EXPECT_EQ(decode_error(bytes), fsc::ErrorCode::BadMagic);
}

TEST(Serialize, DoubleModelLoadsFromFloatFile) {
  const auto m = random_model(8);
  const auto d = decode_model<double>(encode_model(m));
  EXPECT_EQ(static_cast<float>(d.head_weight[5]), m.head_weight[5]);
}

TEST(Serialize, FailedSaveLeavesExistingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "fsc_serialize_dir";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.bcnn";
  save_model(random_model(9), path);
  const auto before = fsc::io::read_file(path);
  EXPECT_THROW(save_model(random_model(10), dir / "missing" / "m.bcnn"), fsc::Error);
  EXPECT_EQ(fsc::io::read_file(path), before);
  std::filesystem::remove_all(dir);
}
