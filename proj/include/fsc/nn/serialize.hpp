#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "fsc/io/file.hpp"
#include "fsc/nn/resnet.hpp"

namespace fsc::nn {

// Weight file layout, all integers little-endian:
//   "BCNN" | u32 version | u32 C | C x (u32 len, bytes) class names
//   | u32 blocks | blocks x u32 filters | u32 kernels | kernels x u32
//   | u32 n_frames | u8 znorm
//   | u64 value count | values as f32, visit_state() order
inline constexpr char kModelMagic[4] = {'B', 'C', 'N', 'N'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& data() const noexcept { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& buf, std::string source) : buf_(buf), source_(std::move(source)) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto* p = take(4);
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
  }
  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    return lo | (std::uint64_t{u32()} << 32);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    const auto* p = take(n);
    return {reinterpret_cast<const char*>(p), n};
  }
  bool at_end() const noexcept { return pos_ == buf_.size(); }
  std::size_t remaining() const noexcept { return buf_.size() - pos_; }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (n > buf_.size() - pos_) fail(ErrorCode::IoFailure, source_ + ": file is truncated");
    const auto* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  const std::vector<std::uint8_t>& buf_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <typename T>
std::vector<std::uint8_t> encode_model(const Model<T>& m) {
  detail::ByteWriter w;
  w.bytes(kModelMagic, 4);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(m.class_names.size()));
  for (const auto& n : m.class_names) {
    w.u32(static_cast<std::uint32_t>(n.size()));
    w.bytes(n.data(), n.size());
  }
  w.u32(static_cast<std::uint32_t>(m.arch.filters.size()));
  for (auto f : m.arch.filters) w.u32(static_cast<std::uint32_t>(f));
  w.u32(static_cast<std::uint32_t>(m.arch.kernels.size()));
  for (auto k : m.arch.kernels) w.u32(static_cast<std::uint32_t>(k));
  w.u32(static_cast<std::uint32_t>(m.input.n_frames));
  w.u8(m.input.znorm ? 1 : 0);
  std::uint64_t count = 0;
  visit_state(m, [&](auto s) { count += s.size(); });
  w.u64(count);
  visit_state(m, [&](auto s) {
    for (auto v : s) w.f32(static_cast<float>(v));
  });
  return w.data();
}

template <typename T = float>
Model<T> decode_model(const std::vector<std::uint8_t>& bytes, const std::string& source = "model") {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic, 4) != 0)
    fail(ErrorCode::BadMagic, source + ": not a BCNN weight file");
  detail::ByteReader r(bytes, source);
  r.str(4);
  const std::uint32_t version = r.u32();
  if (version != kModelVersion)
    fail(ErrorCode::VersionMismatch,
         source + ": format version " + std::to_string(version) + ", expected " + std::to_string(kModelVersion));
  const std::uint32_t C = r.u32();
  if (C > r.remaining()) fail(ErrorCode::IoFailure, source + ": implausible class count");
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < C; ++i) names.push_back(r.str(r.u32()));
  Architecture arch;
  arch.filters.resize(r.u32());
  if (arch.filters.size() > r.remaining()) fail(ErrorCode::IoFailure, source + ": implausible block count");
  for (auto& f : arch.filters) f = r.u32();
  arch.kernels.resize(r.u32());
  if (arch.kernels.size() > r.remaining()) fail(ErrorCode::IoFailure, source + ": implausible kernel count");
  for (auto& k : arch.kernels) k = r.u32();
  InputSpec input;
  input.n_frames = r.u32();
  input.znorm = r.u8() != 0;

  Model<T> m = make_model<T>(arch, std::move(names));
  m.input = input;
  std::uint64_t expected = 0;
  visit_state(m, [&](auto s) { expected += s.size(); });
  const std::uint64_t count = r.u64();
  if (count != expected)
    fail(ErrorCode::IoFailure, source + ": parameter count " + std::to_string(count) + " does not match architecture (" +
                                   std::to_string(expected) + ")");
  if (r.remaining() != count * 4) fail(ErrorCode::IoFailure, source + ": file is truncated or has trailing bytes");
  visit_state(m, [&](std::span<T> s) {
    for (auto& v : s) v = static_cast<T>(r.f32());
  });
  return m;
}

template <typename T>
void save_model(const Model<T>& m, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_model(m));
}

template <typename T = float>
Model<T> load_model(const std::filesystem::path& path) {
  return decode_model<T>(io::read_file(path), path.string());
}

}  // namespace fsc::nn
