#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsc {

enum class ErrorCode {
  // bitstream
  NoStartCode,
  MalformedCode,
  NoFrames,
  NotMp4,
  NoVideoTrack,
  TruncatedBox,
  // dataset
  TooShort,
  ClassTooSmall,
  EmptyInput,
  EmptyDataset,
  // statistics
  BinMismatch,
  // network
  ShapeMismatch,
  DivergedLoss,
  // persistence
  IoFailure,
  BadMagic,
  VersionMismatch,
  ManifestError,
  // dtw / metrics / datagen
  BandInfeasible,
  LabelOutOfRange,
  EmptyConfusion,
  BadProfile,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoStartCode: return "NoStartCode";
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::NoFrames: return "NoFrames";
    case ErrorCode::NotMp4: return "NotMp4";
    case ErrorCode::NoVideoTrack: return "NoVideoTrack";
    case ErrorCode::TruncatedBox: return "TruncatedBox";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BinMismatch: return "BinMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::BandInfeasible: return "BandInfeasible";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyConfusion: return "EmptyConfusion";
    case ErrorCode::BadProfile: return "BadProfile";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception type thrown by every fsc component. The code is stable and is
/// what callers (and the CLI exit-code mapping) should switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace fsc
