#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fsc/bitstream/bit_reader.hpp"
#include "fsc/error.hpp"
#include "fsc/series.hpp"

namespace fsc::bitstream {

struct NalUnit {
  std::size_t prefix_offset = 0;   // first byte attributed to this unit (zero_bytes + start code)
  std::size_t payload_offset = 0;  // first byte after the start code
  std::size_t payload_size = 0;    // trailing zero bytes excluded
  std::uint8_t start_code_size = 0;
  std::uint8_t nal_type = 0;
  Codec codec = Codec::AVC;
  bool forbidden_bit = false;

  std::size_t prefix_size() const noexcept { return payload_offset - prefix_offset; }
};

/// Contiguous run of NAL indices forming one coded picture.
struct AccessUnitSpan {
  std::size_t first_nal_index = 0;
  std::size_t last_nal_index = 0;  // inclusive
  std::uint64_t total_bits = 0;
};

inline bool is_vcl(Codec codec, std::uint8_t nal_type) noexcept {
  if (codec == Codec::HEVC) return nal_type <= 31;
  return nal_type >= 1 && nal_type <= 5;
}

inline bool is_access_unit_delimiter(Codec codec, std::uint8_t nal_type) noexcept {
  return codec == Codec::HEVC ? nal_type == 35 : nal_type == 9;
}

// Non-VCL units that belong to the picture they follow: end of sequence /
// stream, filler data, and HEVC suffix SEI.
inline bool is_suffix_unit(Codec codec, std::uint8_t nal_type) noexcept {
  if (codec == Codec::HEVC) return nal_type == 36 || nal_type == 37 || nal_type == 38 || nal_type == 40;
  return nal_type == 10 || nal_type == 11 || nal_type == 12;
}

namespace detail {

inline std::uint8_t parse_nal_type(Codec codec, std::uint8_t first_byte) noexcept {
  return codec == Codec::HEVC ? static_cast<std::uint8_t>((first_byte >> 1) & 0x3F)
                              : static_cast<std::uint8_t>(first_byte & 0x1F);
}

// Position of the next 00 00 01 at or after `from`, or size() if none.
inline std::size_t find_start_code(std::span<const std::uint8_t> s, std::size_t from) noexcept {
  const std::size_t n = s.size();
  std::size_t i = from;
  while (i + 2 < n) {
    if (s[i + 2] > 1) {
      i += 3;
    } else if (s[i + 2] == 1 && s[i + 1] == 0 && s[i] == 0) {
      return i;
    } else {
      ++i;
    }
  }
  return n;
}

}  // namespace detail

/// Splits an Annex-B byte stream into NAL units in stream order.
/// Units whose payload is empty after trimming trailing zeros are dropped and
/// their bytes fold into the next unit's prefix.
inline std::vector<NalUnit> scan_annexb(std::span<const std::uint8_t> stream, Codec codec) {
  if (stream.empty()) fail(ErrorCode::EmptyInput, "stream is empty");
  if (codec != Codec::AVC && codec != Codec::HEVC) fail(ErrorCode::InvalidArgument, "codec must be AVC or HEVC");

  std::vector<NalUnit> units;
  std::size_t sc = detail::find_start_code(stream, 0);
  if (sc == stream.size()) fail(ErrorCode::NoStartCode, "no 00 00 01 start code found; not an Annex-B stream");

  std::size_t prefix = sc;
  while (sc < stream.size()) {
    const std::size_t payload_begin = sc + 3;
    const std::size_t next = detail::find_start_code(stream, payload_begin);
    std::size_t payload_end = next;
    while (payload_end > payload_begin && stream[payload_end - 1] == 0) --payload_end;

    if (payload_end > payload_begin) {
      NalUnit u;
      u.prefix_offset = prefix;
      u.payload_offset = payload_begin;
      u.payload_size = payload_end - payload_begin;
      u.start_code_size = (sc > 0 && stream[sc - 1] == 0) ? 4 : 3;
      u.codec = codec;
      u.forbidden_bit = (stream[payload_begin] & 0x80) != 0;
      u.nal_type = detail::parse_nal_type(codec, stream[payload_begin]);
      units.push_back(u);
      prefix = payload_end;
    }
    sc = next;
  }
  return units;
}

/// True when a VCL unit opens a new picture: AVC first_mb_in_slice == 0,
/// HEVC first_slice_segment_in_pic_flag == 1.
inline bool is_frame_start(const NalUnit& nal, std::span<const std::uint8_t> payload) {
  if (!is_vcl(nal.codec, nal.nal_type)) fail(ErrorCode::InvalidArgument, "is_frame_start requires a VCL unit");
  const std::size_t header = nal.codec == Codec::HEVC ? 2 : 1;
  if (payload.size() <= header) fail(ErrorCode::MalformedCode, "slice payload shorter than its header");
  // ue(v) with <= 32 leading zeros fits in 9 bytes; allow for escapes.
  const auto head = payload.subspan(header, std::min<std::size_t>(payload.size() - header, 16));
  const auto rbsp = unescape_rbsp(head);
  BitReader bits(rbsp);
  if (nal.codec == Codec::HEVC) return bits.read_bit();
  return read_ue(bits) == 0;
}

struct AnnexBAnalysis {
  std::vector<NalUnit> units;
  std::vector<AccessUnitSpan> access_units;
  std::vector<std::string> warnings;
  std::size_t forbidden_bit_count = 0;
};

/// Groups NAL units into access units. Non-VCL units that precede a picture
/// belong to it; suffix units and anything after the last picture attach to
/// the preceding one. Bits are attributed so that every stream byte belongs to
/// exactly one access unit.
inline AnnexBAnalysis analyze_annexb(std::span<const std::uint8_t> stream, Codec codec) {
  AnnexBAnalysis out;
  out.units = scan_annexb(stream, codec);
  const auto& units = out.units;

  std::vector<std::size_t> starts;  // first NAL index of each access unit
  bool have_vcl = false;            // current access unit already holds a picture
  bool aud_pending = false;
  std::size_t pending = units.size();  // first prefix-type non-VCL unit since the last VCL

  for (std::size_t i = 0; i < units.size(); ++i) {
    const NalUnit& u = units[i];
    if (u.forbidden_bit) ++out.forbidden_bit_count;

    if (!is_vcl(codec, u.nal_type)) {
      if (is_access_unit_delimiter(codec, u.nal_type) && have_vcl) aud_pending = true;
      const bool attaches_back = is_suffix_unit(codec, u.nal_type) && pending == units.size();
      if (!attaches_back && pending == units.size()) pending = i;
      continue;
    }

    bool starts_frame = false;
    try {
      starts_frame = is_frame_start(u, stream.subspan(u.payload_offset, u.payload_size));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedCode) throw;
      if (i + 1 == units.size()) {
        out.warnings.push_back("truncated trailing slice at byte " + std::to_string(u.payload_offset) +
                               "; kept with the preceding frame");
      } else {
        out.warnings.push_back("unparseable slice header at byte " + std::to_string(u.payload_offset));
      }
    }

    if (!have_vcl) {
      starts.push_back(starts.empty() ? 0 : std::min(pending, i));
      have_vcl = true;
    } else if (starts_frame || aud_pending) {
      starts.push_back(std::min(pending, i));
    }
    aud_pending = false;
    pending = units.size();
  }

  if (starts.empty()) fail(ErrorCode::NoFrames, "stream contains no VCL NAL units");
  starts[0] = 0;

  for (std::size_t a = 0; a < starts.size(); ++a) {
    AccessUnitSpan span;
    span.first_nal_index = starts[a];
    span.last_nal_index = (a + 1 < starts.size()) ? starts[a + 1] - 1 : units.size() - 1;
    const std::size_t begin = (a == 0) ? 0 : units[span.first_nal_index].prefix_offset;
    const std::size_t end = (a + 1 < starts.size()) ? units[starts[a + 1]].prefix_offset : stream.size();
    span.total_bits = static_cast<std::uint64_t>(end - begin) * 8;
    out.access_units.push_back(span);
  }
  return out;
}

/// One size per access unit; sizes sum to 8 x stream bytes.
inline FrameSizeSeries extract_frames_annexb(std::span<const std::uint8_t> stream, Codec codec) {
  const auto analysis = analyze_annexb(stream, codec);
  FrameSizeSeries series;
  series.codec = codec;
  series.sizes.reserve(analysis.access_units.size());
  for (const auto& au : analysis.access_units) series.sizes.push_back(au.total_bits);
  return series;
}

/// Guesses AVC vs HEVC from the first NAL header. HEVC headers carry a zero
/// layer-id high bit and a non-zero temporal id, AVC headers never produce a
/// valid HEVC parameter-set type as their first unit.
inline Codec detect_codec(std::span<const std::uint8_t> stream) {
  const std::size_t sc = detail::find_start_code(stream, 0);
  if (sc == stream.size()) fail(ErrorCode::NoStartCode, "no 00 00 01 start code found; not an Annex-B stream");
  const std::size_t p = sc + 3;
  if (p + 1 >= stream.size()) return Codec::AVC;
  const std::uint8_t b0 = stream[p];
  const std::uint8_t b1 = stream[p + 1];
  const std::uint8_t hevc_type = (b0 >> 1) & 0x3F;
  const bool hevc_header_ok = (b0 & 0x80) == 0 && (b1 & 0x07) != 0;
  const bool hevc_leading = hevc_type == 32 || hevc_type == 33 || hevc_type == 34 || hevc_type == 35 ||
                            hevc_type == 39 || (hevc_type >= 16 && hevc_type <= 21);
  if (hevc_header_ok && hevc_leading) return Codec::HEVC;
  return Codec::AVC;
}

}  // namespace fsc::bitstream
