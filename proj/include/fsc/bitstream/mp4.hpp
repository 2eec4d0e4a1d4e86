#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsc/error.hpp"
#include "fsc/series.hpp"

namespace fsc::bitstream {

struct BoxHeader {
  std::array<char, 4> box_type{};
  std::uint64_t header_offset = 0;  // absolute offset of the size field
  std::uint32_t header_size = 0;    // 8, or 16 for the 64-bit form
  std::uint64_t content_size = 0;
  bool is_large = false;

  std::uint64_t content_offset() const noexcept { return header_offset + header_size; }
  std::uint64_t end() const noexcept { return content_offset() + content_size; }
  std::string_view type() const noexcept { return {box_type.data(), 4}; }
};

namespace detail {

inline std::uint32_t be32(std::span<const std::uint8_t> d, std::uint64_t off) {
  return (std::uint32_t{d[off]} << 24) | (std::uint32_t{d[off + 1]} << 16) | (std::uint32_t{d[off + 2]} << 8) |
         std::uint32_t{d[off + 3]};
}

inline std::uint64_t be64(std::span<const std::uint8_t> d, std::uint64_t off) {
  return (std::uint64_t{be32(d, off)} << 32) | be32(d, off + 4);
}

// Bounds-checked big-endian cursor over one box's content.
class FieldReader {
 public:
  FieldReader(std::span<const std::uint8_t> file, const BoxHeader& box)
      : file_(file), pos_(box.content_offset()), end_(box.end()), type_(box.type()) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)); }
  std::uint32_t u24() { return static_cast<std::uint32_t>(take(3)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }
  void skip(std::uint64_t n) {
    need(n);
    pos_ += n;
  }
  std::uint64_t remaining() const noexcept { return end_ - pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > end_ - pos_) fail(ErrorCode::TruncatedBox, "'" + std::string(type_) + "' box content too short");
  }
  std::uint64_t take(unsigned n) {
    need(n);
    std::uint64_t v = 0;
    for (unsigned i = 0; i < n; ++i) v = (v << 8) | file_[pos_ + i];
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> file_;
  std::uint64_t pos_;
  std::uint64_t end_;
  std::string_view type_;
};

inline bool is_known_top_level(std::string_view t) {
  constexpr std::array<std::string_view, 12> known = {"ftyp", "styp", "moov", "mdat", "free", "skip",
                                                      "wide", "pdin", "sidx", "moof", "uuid", "meta"};
  for (auto k : known)
    if (k == t) return true;
  return false;
}

}  // namespace detail

/// Reads the box header at `offset`; the box must end within [offset, parent_end).
inline BoxHeader read_box_header(std::span<const std::uint8_t> file, std::uint64_t offset, std::uint64_t parent_end) {
  if (parent_end > file.size() || offset + 8 > parent_end)
    fail(ErrorCode::TruncatedBox, "box header at byte " + std::to_string(offset) + " extends past its parent");
  BoxHeader h;
  h.header_offset = offset;
  const std::uint32_t size32 = detail::be32(file, offset);
  for (int i = 0; i < 4; ++i) h.box_type[i] = static_cast<char>(file[offset + 4 + i]);
  std::uint64_t total = size32;
  h.header_size = 8;
  if (size32 == 1) {
    if (offset + 16 > parent_end) fail(ErrorCode::TruncatedBox, "64-bit box header truncated");
    total = detail::be64(file, offset + 8);
    h.header_size = 16;
    h.is_large = true;
  } else if (size32 == 0) {
    total = parent_end - offset;
  }
  if (total < h.header_size || total > parent_end - offset)
    fail(ErrorCode::TruncatedBox,
         "'" + std::string(h.type()) + "' box at byte " + std::to_string(offset) + " extends past its parent");
  h.content_size = total - h.header_size;
  return h;
}

/// Direct children of a container box (or of the file when `parent` is empty).
inline std::vector<BoxHeader> read_children(std::span<const std::uint8_t> file, std::uint64_t begin,
                                            std::uint64_t end) {
  std::vector<BoxHeader> out;
  std::uint64_t pos = begin;
  while (pos < end) {
    out.push_back(read_box_header(file, pos, end));
    pos = out.back().end();
  }
  return out;
}

inline std::vector<BoxHeader> read_children(std::span<const std::uint8_t> file, const BoxHeader& parent) {
  return read_children(file, parent.content_offset(), parent.end());
}

inline std::optional<BoxHeader> find_child(std::span<const std::uint8_t> file, const BoxHeader& parent,
                                           std::string_view type) {
  for (const auto& b : read_children(file, parent))
    if (b.type() == type) return b;
  return std::nullopt;
}

/// Cheap check used by container auto-detection: the first box is a known
/// top-level ISO-BMFF box that fits in the file.
inline bool looks_like_mp4(std::span<const std::uint8_t> file) {
  if (file.size() < 8) return false;
  try {
    const auto h = read_box_header(file, 0, file.size());
    return detail::is_known_top_level(h.type());
  } catch (const Error&) {
    return false;
  }
}

struct Mp4Sample {
  std::uint64_t offset = 0;  // absolute file offset of the sample data
  std::uint32_t size = 0;    // bytes
};

struct Mp4VideoTrack {
  std::uint32_t track_id = 0;
  std::uint32_t timescale = 0;
  std::map<std::uint32_t, std::uint64_t> delta_counts;  // sample duration -> number of samples

  /// Most common sample duration; ties go to the shorter one. 0 if unknown.
  std::uint32_t typical_delta() const {
    std::uint32_t best = 0;
    std::uint64_t best_n = 0;
    for (const auto& [d, n] : delta_counts)
      if (d > 0 && n > best_n) best = d, best_n = n;
    return best;
  }
  Codec codec = Codec::Unknown;
  std::vector<Mp4Sample> samples;  // decode (stored) order
};

namespace detail {

struct TrackDefaults {
  std::uint32_t duration = 0;
  std::uint32_t size = 0;
};

inline std::vector<std::uint64_t> read_chunk_offsets(std::span<const std::uint8_t> file, const BoxHeader& stbl) {
  std::vector<std::uint64_t> offs;
  for (const auto& b : read_children(file, stbl)) {
    if (b.type() != "stco" && b.type() != "co64") continue;
    FieldReader r(file, b);
    r.u32();
    const std::uint32_t n = r.u32();
    offs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) offs.push_back(b.type() == "stco" ? r.u32() : r.u64());
  }
  return offs;
}

inline std::vector<std::uint32_t> read_sample_sizes(std::span<const std::uint8_t> file, const BoxHeader& stbl) {
  std::vector<std::uint32_t> sizes;
  for (const auto& b : read_children(file, stbl)) {
    if (b.type() == "stsz") {
      FieldReader r(file, b);
      r.u32();
      const std::uint32_t uniform = r.u32();
      const std::uint32_t count = r.u32();
      if (uniform != 0) return std::vector<std::uint32_t>(count, uniform);
      if (std::uint64_t{count} * 4 > r.remaining()) fail(ErrorCode::TruncatedBox, "'stsz' table truncated");
      sizes.resize(count);
      for (auto& s : sizes) s = r.u32();
      return sizes;
    }
    if (b.type() == "stz2") {
      FieldReader r(file, b);
      r.u32();
      r.u24();
      const std::uint8_t field = r.u8();
      const std::uint32_t count = r.u32();
      if (field != 4 && field != 8 && field != 16) fail(ErrorCode::TruncatedBox, "'stz2' has invalid field size");
      sizes.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        if (field == 16) {
          sizes[i] = (std::uint32_t{r.u8()} << 8) | r.u8();
        } else if (field == 8) {
          sizes[i] = r.u8();
        } else {
          const std::uint8_t pair = r.u8();
          sizes[i] = pair >> 4;
          if (++i < count) sizes[i] = pair & 0x0F;
        }
      }
      return sizes;
    }
  }
  return sizes;
}

// Assigns absolute offsets to samples using stsc + chunk offsets.
inline void assign_offsets(std::span<const std::uint8_t> file, const BoxHeader& stbl, std::vector<Mp4Sample>& samples) {
  const auto chunks = read_chunk_offsets(file, stbl);
  struct Run {
    std::uint32_t first_chunk, per_chunk;
  };
  std::vector<Run> runs;
  for (const auto& b : read_children(file, stbl)) {
    if (b.type() != "stsc") continue;
    FieldReader r(file, b);
    r.u32();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      Run run{r.u32(), r.u32()};
      r.u32();
      runs.push_back(run);
    }
  }
  if (chunks.empty() || runs.empty()) return;
  std::size_t s = 0;
  for (std::size_t c = 0; c < chunks.size() && s < samples.size(); ++c) {
    std::uint32_t per = runs.front().per_chunk;
    for (const auto& run : runs)
      if (run.first_chunk <= c + 1) per = run.per_chunk;
    std::uint64_t off = chunks[c];
    for (std::uint32_t k = 0; k < per && s < samples.size(); ++k, ++s) {
      samples[s].offset = off;
      off += samples[s].size;
    }
  }
}

inline void read_stts_deltas(std::span<const std::uint8_t> file, const BoxHeader& stbl,
                             std::map<std::uint32_t, std::uint64_t>& counts) {
  if (auto stts = find_child(file, stbl, "stts")) {
    FieldReader r(file, *stts);
    r.u32();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint64_t count = r.u32();
      counts[r.u32()] += count;
    }
  }
}

inline Codec codec_from_stsd(std::span<const std::uint8_t> file, const BoxHeader& stbl) {
  auto stsd = find_child(file, stbl, "stsd");
  if (!stsd || stsd->content_size < 16) return Codec::Unknown;
  const auto entry = read_box_header(file, stsd->content_offset() + 8, stsd->end());
  const auto t = entry.type();
  if (t == "avc1" || t == "avc3") return Codec::AVC;
  if (t == "hvc1" || t == "hev1") return Codec::HEVC;
  return Codec::Unknown;
}

inline void read_fragment(std::span<const std::uint8_t> file, const BoxHeader& moof, Mp4VideoTrack& track,
                          const TrackDefaults& trex) {
  std::uint64_t next_base = moof.header_offset;
  bool first_traf = true;
  for (const auto& traf : read_children(file, moof)) {
    if (traf.type() != "traf") continue;
    auto tfhd = find_child(file, traf, "tfhd");
    if (!tfhd) fail(ErrorCode::TruncatedBox, "'traf' without 'tfhd'");
    FieldReader h(file, *tfhd);
    const std::uint32_t tf_flags = h.u32() & 0xFFFFFF;
    const std::uint32_t track_id = h.u32();
    std::uint64_t base = first_traf ? moof.header_offset : next_base;
    first_traf = false;
    if (tf_flags & 0x000001) base = h.u64();
    if (tf_flags & 0x020000) base = moof.header_offset;
    if (tf_flags & 0x000002) h.u32();
    TrackDefaults def = trex;
    if (tf_flags & 0x000008) def.duration = h.u32();
    if (tf_flags & 0x000010) def.size = h.u32();

    std::uint64_t cursor = base;
    for (const auto& trun : read_children(file, traf)) {
      if (trun.type() != "trun") continue;
      FieldReader r(file, trun);
      const std::uint32_t flags = r.u32() & 0xFFFFFF;
      const std::uint32_t count = r.u32();
      if (flags & 0x001) cursor = base + static_cast<std::int64_t>(static_cast<std::int32_t>(r.u32()));
      if (flags & 0x004) r.u32();
      for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t dur = (flags & 0x100) ? r.u32() : def.duration;
        const std::uint32_t size = (flags & 0x200) ? r.u32() : def.size;
        if (flags & 0x400) r.u32();
        if (flags & 0x800) r.u32();
        if (track_id == track.track_id) {
          track.samples.push_back({cursor, size});
          ++track.delta_counts[dur];
        }
        cursor += size;
      }
    }
    next_base = cursor;
  }
}

}  // namespace detail

/// Locates the first 'vide' track and collects its samples from the sample
/// table and from any movie fragments, in stored order.
inline Mp4VideoTrack read_mp4_video_track(std::span<const std::uint8_t> file) {
  if (!looks_like_mp4(file)) fail(ErrorCode::NotMp4, "first box is not a recognised ISO-BMFF top-level box");
  const auto top = read_children(file, 0, file.size());

  std::optional<BoxHeader> moov;
  for (const auto& b : top)
    if (b.type() == "moov") moov = b;
  if (!moov) fail(ErrorCode::NotMp4, "no 'moov' box");

  std::optional<Mp4VideoTrack> track;
  for (const auto& trak : read_children(file, *moov)) {
    if (trak.type() != "trak") continue;
    auto mdia = find_child(file, trak, "mdia");
    if (!mdia) continue;
    auto hdlr = find_child(file, *mdia, "hdlr");
    if (!hdlr || hdlr->content_size < 12) continue;
    if (std::string_view(reinterpret_cast<const char*>(file.data() + hdlr->content_offset() + 8), 4) != "vide")
      continue;

    Mp4VideoTrack t;
    if (auto tkhd = find_child(file, trak, "tkhd")) {
      detail::FieldReader r(file, *tkhd);
      const std::uint8_t version = r.u8();
      r.u24();
      r.skip(version == 1 ? 16 : 8);
      t.track_id = r.u32();
    }
    if (auto mdhd = find_child(file, *mdia, "mdhd")) {
      detail::FieldReader r(file, *mdhd);
      const std::uint8_t version = r.u8();
      r.u24();
      r.skip(version == 1 ? 16 : 8);
      t.timescale = r.u32();
    }
    if (auto minf = find_child(file, *mdia, "minf")) {
      if (auto stbl = find_child(file, *minf, "stbl")) {
        const auto sizes = detail::read_sample_sizes(file, *stbl);
        t.samples.reserve(sizes.size());
        for (auto s : sizes) t.samples.push_back({0, s});
        detail::assign_offsets(file, *stbl, t.samples);
        detail::read_stts_deltas(file, *stbl, t.delta_counts);
        t.codec = detail::codec_from_stsd(file, *stbl);
      }
    }
    track = std::move(t);
    break;
  }
  if (!track) fail(ErrorCode::NoVideoTrack, "no track with handler type 'vide'");

  detail::TrackDefaults trex;
  if (auto mvex = find_child(file, *moov, "mvex")) {
    for (const auto& b : read_children(file, *mvex)) {
      if (b.type() != "trex") continue;
      detail::FieldReader r(file, b);
      r.u32();
      if (r.u32() != track->track_id) continue;
      r.u32();
      trex.duration = r.u32();
      trex.size = r.u32();
    }
  }
  for (const auto& b : top)
    if (b.type() == "moof") detail::read_fragment(file, b, *track, trex);
  return *track;
}

enum class Mp4SizeMode {
  SampleBytes,       // per-sample payload sizes as stored
  IncludeOverhead,   // every file byte attributed to a video sample, in file order
};

/// Per-frame sizes (bits) of the first video track, in stored order.
inline FrameSizeSeries extract_frames_mp4(std::span<const std::uint8_t> file,
                                          Mp4SizeMode mode = Mp4SizeMode::SampleBytes) {
  const auto track = read_mp4_video_track(file);
  if (track.samples.empty()) fail(ErrorCode::NoFrames, "video track has no samples");

  FrameSizeSeries series;
  series.codec = track.codec;
  // The nominal rate; a short or long final sample does not skew it.
  if (track.timescale > 0 && track.typical_delta() > 0)
    series.fps = static_cast<double>(track.timescale) / track.typical_delta();

  series.sizes.reserve(track.samples.size());
  if (mode == Mp4SizeMode::SampleBytes) {
    for (const auto& s : track.samples) series.sizes.push_back(std::uint64_t{s.size} * 8);
    return series;
  }

  // Frame i spans [offset_i, offset_{i+1}); the first frame also takes the
  // leading bytes, the last frame everything up to end of file.
  const auto& s = track.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool ordered = (i + 1 >= s.size() || s[i + 1].offset >= s[i].offset + s[i].size);
    if (!ordered || s[i].offset + s[i].size > file.size())
      fail(ErrorCode::InvalidArgument, "overhead-inclusive mode needs video samples stored in ascending file order");
    const std::uint64_t begin = (i == 0) ? 0 : s[i].offset;
    const std::uint64_t end = (i + 1 < s.size()) ? s[i + 1].offset : file.size();
    series.sizes.push_back((end - begin) * 8);
  }
  return series;
}

}  // namespace fsc::bitstream
