#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fsc/io/file.hpp"
#include "fsc/series.hpp"

namespace fsc::io {

// FSTS layout, little-endian:
//   "FSTS" | u16 version | u16 flags | f32 fps (0 = unknown) | u32 frame_count
//   | frame_count x u64 size in bits
// flags bits 0-1 carry the codec (0 unknown, 1 AVC, 2 HEVC); other bits are 0.
inline constexpr char kFstsMagic[4] = {'F', 'S', 'T', 'S'};
inline constexpr std::uint16_t kFstsVersion = 1;
inline constexpr std::size_t kFstsHeaderSize = 16;

inline std::vector<std::uint8_t> encode_fsts(const FrameSizeSeries& s) {
  validate(s);
  std::vector<std::uint8_t> out;
  out.reserve(kFstsHeaderSize + 8 * s.sizes.size());
  auto put = [&](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  out.insert(out.end(), kFstsMagic, kFstsMagic + 4);
  put(kFstsVersion, 2);
  put(static_cast<std::uint16_t>(s.codec) & 0x3, 2);
  put(std::bit_cast<std::uint32_t>(static_cast<float>(s.fps)), 4);
  put(static_cast<std::uint32_t>(s.sizes.size()), 4);
  for (auto v : s.sizes) put(v, 8);
  return out;
}

inline FrameSizeSeries decode_fsts(std::span<const std::uint8_t> b, const std::string& source = "fsts") {
  if (b.size() < 4 || std::memcmp(b.data(), kFstsMagic, 4) != 0) fail(ErrorCode::BadMagic, source + ": not an FSTS file");
  if (b.size() < kFstsHeaderSize) fail(ErrorCode::IoFailure, source + ": truncated header");
  auto get = [&](std::size_t off, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{b[off + i]} << (8 * i);
    return v;
  };
  const auto version = static_cast<std::uint16_t>(get(4, 2));
  if (version != kFstsVersion)
    fail(ErrorCode::VersionMismatch, source + ": FSTS version " + std::to_string(version) + " is not supported");
  const auto flags = static_cast<std::uint16_t>(get(6, 2));
  const float fps = std::bit_cast<float>(static_cast<std::uint32_t>(get(8, 4)));
  const std::uint64_t count = get(12, 4);
  if (b.size() != kFstsHeaderSize + 8 * count)
    fail(ErrorCode::IoFailure, source + ": declared frame count " + std::to_string(count) + " does not match payload");

  FrameSizeSeries s;
  s.codec = static_cast<Codec>(flags & 0x3);
  s.fps = fps;
  s.source_id = source;
  s.sizes.resize(count);
  for (std::size_t i = 0; i < count; ++i) s.sizes[i] = get(kFstsHeaderSize + 8 * i, 8);
  validate(s);
  return s;
}

inline void write_fsts(const std::filesystem::path& path, const FrameSizeSeries& s) {
  write_file_atomic(path, encode_fsts(s));
}

inline FrameSizeSeries read_fsts(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  auto s = decode_fsts(bytes, path.string());
  s.source_id = path.stem().string();
  return s;
}

}  // namespace fsc::io
