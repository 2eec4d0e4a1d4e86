#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fsc/error.hpp"

namespace fsc {

enum class Codec : std::uint8_t { Unknown = 0, AVC = 1, HEVC = 2 };

constexpr std::string_view to_string(Codec c) {
  switch (c) {
    case Codec::AVC: return "avc";
    case Codec::HEVC: return "hevc";
    default: return "unknown";
  }
}

/// Per-frame compressed sizes in bits, in encoding (stored) order.
struct FrameSizeSeries {
  std::vector<std::uint64_t> sizes;
  Codec codec = Codec::Unknown;
  double fps = 0.0;  // 0 = unknown
  std::string source_id;

  std::size_t length() const noexcept { return sizes.size(); }

  std::uint64_t total_bits() const noexcept {
    std::uint64_t sum = 0;
    for (auto s : sizes) sum += s;
    return sum;
  }

  bool operator==(const FrameSizeSeries&) const = default;
};

/// Throws unless the series is non-empty with strictly positive sizes.
inline void validate(const FrameSizeSeries& s) {
  if (s.sizes.empty()) fail(ErrorCode::EmptyInput, "frame size series is empty");
  for (std::size_t i = 0; i < s.sizes.size(); ++i) {
    if (s.sizes[i] == 0) fail(ErrorCode::InvalidArgument, "frame " + std::to_string(i) + " has size 0");
  }
}

}  // namespace fsc
