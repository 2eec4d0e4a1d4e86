#include "fsc/bitstream/annexb.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace fsc::bitstream;
using fsc::Codec;
using fsc::ErrorCode;
using Bytes = std::vector<std::uint8_t>;

namespace {

void append(Bytes& s, std::initializer_list<std::uint8_t> b) { s.insert(s.end(), b); }

// AVC NAL with a slice header whose first ue(v) is `first_mb`, padded to `size` bytes.
Bytes avc_slice(std::uint8_t type, std::uint64_t first_mb, std::size_t size) {
  fsc::test::BitWriter w;
  w.bits(0x60 | type, 8);
  w.ue(first_mb);
  w.ue(0);  // slice_type
  w.bit(1);
  Bytes b = w.bytes();
  while (b.size() < size) b.push_back(0x5A);
  return b;
}

Bytes with_start_code(const Bytes& nal, bool four = true) {
  Bytes out(four ? 3 : 2, 0);
  out.push_back(1);
  out.reserve(out.size() + nal.size());
  for (auto b : nal) out.push_back(b);
  return out;
}

}  // namespace

TEST(ScanAnnexB, TwoUnitsWithBothStartCodeLengths) {
  const Bytes s{0, 0, 0, 1, 0x67, 0x42, 0, 0, 1, 0x65, 0x88, 0x84};
  const auto units = scan_annexb(s, Codec::AVC);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].nal_type, 7);
  EXPECT_EQ(units[0].payload_size, 2u);
  EXPECT_EQ(units[0].start_code_size, 4);
  EXPECT_EQ(units[1].nal_type, 5);
  EXPECT_EQ(units[1].payload_size, 3u);
  EXPECT_EQ(units[1].start_code_size, 3);
  EXPECT_EQ(units[1].payload_offset, 9u);
}

TEST(ScanAnnexB, NoStartCode) {
  try {
    scan_annexb(Bytes{0xFF, 0xFF, 0xFF}, Codec::AVC);
    FAIL();
  } catch (const fsc::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoStartCode);
  }
}

TEST(ScanAnnexB, TrailingZerosExcludedAndForbiddenBitReported) {
  const Bytes s{0, 0, 1, 0x67, 0x42, 0, 0, 0, 0, 1, 0xE5, 0x11};
  const auto units = scan_annexb(s, Codec::AVC);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].payload_size, 2u);
  EXPECT_EQ(units[1].prefix_offset, 5u);
  EXPECT_TRUE(units[1].forbidden_bit);
  EXPECT_EQ(units[1].nal_type, 5);
}

TEST(ScanAnnexB, HevcTypeFromBitsOneToSix) {
  const Bytes s{0, 0, 0, 1, 0x40, 0x01, 0x0C, 0, 0, 1, 0x26, 0x01, 0xAF};
  const auto units = scan_annexb(s, Codec::HEVC);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(units[0].nal_type, 32);  // VPS
  EXPECT_EQ(units[1].nal_type, 19);  // IDR_W_RADL
}

TEST(IsFrameStart, AvcFirstMbInSlice) {
  NalUnit u;
  u.codec = Codec::AVC;
  u.nal_type = 1;
  EXPECT_TRUE(is_frame_start(u, Bytes{0x41, 0b1000'0000}));
  EXPECT_FALSE(is_frame_start(u, Bytes{0x41, 0b0100'0000}));
}

TEST(IsFrameStart, HevcFirstSliceSegmentFlag) {
  NalUnit u;
  u.codec = Codec::HEVC;
  u.nal_type = 1;
  EXPECT_TRUE(is_frame_start(u, Bytes{0x02, 0x01, 0x80}));
  EXPECT_FALSE(is_frame_start(u, Bytes{0x02, 0x01, 0x40}));
}

TEST(IsFrameStart, HonoursEmulationPrevention) {
  // first_mb_in_slice coded with 22 leading zeros forces an escape byte.
  fsc::test::BitWriter w;
  w.bits(0x41, 8);
  w.ue((1u << 22) - 1);
  auto raw = w.bytes();
  while (raw.size() < 8) raw.push_back(0x80);
  const auto escaped = fsc::test::escape_rbsp(raw);
  ASSERT_GT(escaped.size(), raw.size());
  NalUnit u;
  u.codec = Codec::AVC;
  u.nal_type = 1;
  EXPECT_FALSE(is_frame_start(u, escaped));
}

TEST(ExtractAnnexB, SizeAttributionExample) {
  Bytes s;
  auto sps = Bytes(10, 0x11);
  sps[0] = 0x67;
  append(s, {0, 0, 0, 1});
  s.insert(s.end(), sps.begin(), sps.end());
  const auto idr = with_start_code(avc_slice(5, 0, 100));
  const auto p = with_start_code(avc_slice(1, 0, 40));
  s.insert(s.end(), idr.begin(), idr.end());
  s.insert(s.end(), p.begin(), p.end());
  const auto series = extract_frames_annexb(s, Codec::AVC);
  ASSERT_EQ(series.sizes.size(), 2u);
  EXPECT_EQ(series.sizes[0], (4u + 10 + 4 + 100) * 8);
  EXPECT_EQ(series.sizes[1], (4u + 40) * 8);
}

TEST(ExtractAnnexB, SingleFrameIsWholeFile) {
  const auto s = with_start_code(avc_slice(5, 0, 50));
  const auto series = extract_frames_annexb(s, Codec::AVC);
  ASSERT_EQ(series.sizes.size(), 1u);
  EXPECT_EQ(series.sizes[0], s.size() * 8);
}

TEST(ExtractAnnexB, MultiSliceFrameStaysTogether) {
  Bytes s;
  for (auto mb : {0, 40, 80, 0, 60}) {
    const auto u = with_start_code(avc_slice(1, static_cast<std::uint64_t>(mb), 20));
    s.insert(s.end(), u.begin(), u.end());
  }
  const auto series = extract_frames_annexb(s, Codec::AVC);
  ASSERT_EQ(series.sizes.size(), 2u);
  EXPECT_EQ(series.sizes[0], 3u * 24 * 8);
  EXPECT_EQ(series.sizes[1], 2u * 24 * 8);
}

TEST(ExtractAnnexB, AccessUnitDelimiterForcesBoundary) {
  Bytes s;
  const auto a = with_start_code(avc_slice(1, 0, 20));
  const auto aud = with_start_code(Bytes{0x09, 0xF0});
  const auto b = with_start_code(avc_slice(1, 5, 20));  // not a frame start by itself
  for (const auto* u : {&a, &aud, &b}) s.insert(s.end(), u->begin(), u->end());
  const auto series = extract_frames_annexb(s, Codec::AVC);
  ASSERT_EQ(series.sizes.size(), 2u);
  EXPECT_EQ(series.sizes[1], (aud.size() + b.size()) * 8);
}

TEST(ExtractAnnexB, NoVclIsNoFrames) {
  const auto s = with_start_code(Bytes{0x67, 0x42, 0x11});
  try {
    extract_frames_annexb(s, Codec::AVC);
    FAIL();
  } catch (const fsc::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoFrames);
  }
}

TEST(ExtractAnnexB, TruncatedTrailingSliceKeptWithWarning) {
  Bytes s = with_start_code(avc_slice(5, 0, 30));
  append(s, {0, 0, 1, 0x41});  // slice header cut off after the NAL byte
  const auto analysis = analyze_annexb(s, Codec::AVC);
  ASSERT_EQ(analysis.access_units.size(), 1u);
  EXPECT_EQ(analysis.access_units[0].total_bits, s.size() * 8);
  ASSERT_EQ(analysis.warnings.size(), 1u);
  EXPECT_NE(analysis.warnings[0].find("truncated"), std::string::npos);
}

TEST(ExtractAnnexB, RandomNalSequencesPartitionAndConserve) {
  std::mt19937_64 rng(11);
  const std::uint8_t non_vcl[] = {6, 7, 8, 9, 10, 12};
  for (int trial = 0; trial < 500; ++trial) {
    Bytes s;
    if (rng() % 3 == 0) append(s, {0xAA, 0xBB});  // junk before the first start code
    const int n = 1 + static_cast<int>(rng() % 30);
    bool any_vcl = false;
    for (int i = 0; i < n || !any_vcl; ++i) {
      Bytes nal;
      if (rng() % 2) {
        nal = avc_slice(static_cast<std::uint8_t>(1 + rng() % 5), rng() % 3 == 0 ? 0 : rng() % 50, 2 + rng() % 40);
        any_vcl = true;
      } else {
        nal = Bytes(1 + rng() % 20, 0x33);
        nal[0] = static_cast<std::uint8_t>(0x60 | non_vcl[rng() % std::size(non_vcl)]);
      }
      if (rng() % 4 == 0) s.push_back(0);  // extra zero byte
      const auto u = with_start_code(nal, rng() % 2);
      s.insert(s.end(), u.begin(), u.end());
    }
    const auto a = analyze_annexb(s, Codec::AVC);
    ASSERT_FALSE(a.access_units.empty());
    std::uint64_t total = 0;
    std::size_t expect_first = 0;
    for (const auto& au : a.access_units) {
      ASSERT_EQ(au.first_nal_index, expect_first);
      ASSERT_LE(au.first_nal_index, au.last_nal_index);
      bool has_vcl = false;
      for (std::size_t k = au.first_nal_index; k <= au.last_nal_index; ++k)
        has_vcl |= is_vcl(Codec::AVC, a.units[k].nal_type);
      ASSERT_TRUE(has_vcl) << "trial " << trial;
      expect_first = au.last_nal_index + 1;
      total += au.total_bits;
    }
    ASSERT_EQ(expect_first, a.units.size());
    ASSERT_EQ(total, s.size() * 8);
  }
}

class RealEncode : public ::testing::TestWithParam<std::string> {};

TEST_P(RealEncode, MatchesIndependentDemuxer) {
  const auto name = GetParam();
  const auto bytes = fsc::test::read_bytes(fsc::test::data_path(name));
  const auto expected = fsc::test::oracle()[name];
  const Codec codec = expected["codec"] == "hevc" ? Codec::HEVC : Codec::AVC;
  EXPECT_EQ(detect_codec(bytes), codec);

  const auto series = extract_frames_annexb(bytes, codec);
  EXPECT_EQ(series.total_bits(), 8 * bytes.size());
  ASSERT_EQ(series.sizes.size(), expected["frames"].get<std::size_t>());
  const auto packets = expected["packet_bytes"].get<std::vector<std::uint64_t>>();
  for (std::size_t i = 0; i < packets.size(); ++i) EXPECT_EQ(series.sizes[i], 8 * packets[i]) << "frame " << i;

  EXPECT_EQ(extract_frames_annexb(bytes, codec), series);
}

INSTANTIATE_TEST_SUITE_P(Fixtures, RealEncode,
                         ::testing::Values("avc_ippp.h264", "avc_bframes_aud.h264", "avc_slices.h264", "hevc.h265"));
