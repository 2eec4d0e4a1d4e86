#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fsc/error.hpp"

namespace fsc::bitstream {

/// MSB-first reader over a byte buffer. Reading past the end throws
/// MalformedCode, which is how truncated headers surface to callers.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data) noexcept : data_(data) {}

  std::size_t position() const noexcept { return pos_; }
  std::size_t bits_left() const noexcept { return data_.size() * 8 - pos_; }

  bool read_bit() {
    if (pos_ >= data_.size() * 8) fail(ErrorCode::MalformedCode, "bit reader exhausted");
    const bool bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
  }

  std::uint64_t read_bits(unsigned n) {
    if (n > 64) fail(ErrorCode::InvalidArgument, "read_bits supports at most 64 bits");
    if (n > bits_left()) fail(ErrorCode::MalformedCode, "bit reader exhausted");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint64_t>(read_bit());
    return v;
  }

  void skip_bits(std::size_t n) {
    if (n > bits_left()) fail(ErrorCode::MalformedCode, "bit reader exhausted");
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// Unsigned Exp-Golomb ue(v): 2^z - 1 + read(z) after z leading zeros.
inline std::uint64_t read_ue(BitReader& bits) {
  unsigned zeros = 0;
  while (!bits.read_bit()) {
    if (++zeros > 32) fail(ErrorCode::MalformedCode, "Exp-Golomb prefix longer than 32 bits");
  }
  if (zeros == 0) return 0;
  return ((std::uint64_t{1} << zeros) - 1) + bits.read_bits(zeros);
}

/// Removes emulation-prevention bytes: each 00 00 03 becomes 00 00.
inline std::vector<std::uint8_t> unescape_rbsp(std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> out;
  out.reserve(payload.size());
  int zeros = 0;
  for (const std::uint8_t b : payload) {
    if (zeros >= 2 && b == 0x03) {
      zeros = 0;
      continue;
    }
    out.push_back(b);
    zeros = (b == 0) ? zeros + 1 : 0;
  }
  return out;
}

}  // namespace fsc::bitstream
