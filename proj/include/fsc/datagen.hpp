#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fsc/dataset.hpp"
#include "fsc/error.hpp"
#include "fsc/series.hpp"

namespace fsc::datagen {

/// Frame-size statistics of one synthetic "video class".
struct ClassProfile {
  std::string name;
  std::size_t gop_length = 30;
  double i_size_mean = 80000;  // bits
  double p_size_mean = 12000;
  double b_size_mean = 4000;
  double size_jitter = 0.2;  // relative std of the lognormal multiplier
  double scene_change_rate = 0.01;
  bool b_frames = false;  // IBBP... instead of IPPP...
};

inline void validate(const ClassProfile& p) {
  if (!(p.i_size_mean > 0 && p.p_size_mean > 0 && p.b_size_mean > 0))
    fail(ErrorCode::BadProfile, "profile '" + p.name + "': size means must be positive");
  if (!(p.scene_change_rate >= 0 && p.scene_change_rate <= 0.2))
    fail(ErrorCode::BadProfile, "profile '" + p.name + "': scene_change_rate must be in [0, 0.2]");
  if (p.gop_length < 2) fail(ErrorCode::BadProfile, "profile '" + p.name + "': gop_length must be >= 2");
  if (!(p.size_jitter >= 0)) fail(ErrorCode::BadProfile, "profile '" + p.name + "': size_jitter must be >= 0");
}

/// splitmix64 finalizer, used to derive independent per-clip seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Frame t of a GOP is I at phase 0; with B-frames every third frame after
/// the I is P and the rest are B. A scene change turns a P/B frame into an
/// I-sized frame and restarts the GOP. Sizes are mean x lognormal(jitter).
inline FrameSizeSeries generate(const ClassProfile& profile, std::size_t n_frames, std::uint64_t seed) {
  validate(profile);
  if (n_frames < profile.gop_length)
    fail(ErrorCode::BadProfile, "n_frames must be at least the GOP length");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma2 = std::log1p(profile.size_jitter * profile.size_jitter);
  const double sigma = std::sqrt(sigma2);

  auto draw = [&](double mean) {
    if (sigma == 0.0) return mean;
    return mean * std::exp(sigma * normal(rng) - 0.5 * sigma2);
  };

  FrameSizeSeries s;
  s.source_id = profile.name;
  s.fps = 30.0;
  s.sizes.reserve(n_frames);
  std::size_t phase = 0;
  for (std::size_t t = 0; t < n_frames; ++t) {
    double mean;
    if (phase == 0) {
      mean = profile.i_size_mean;
    } else if (profile.scene_change_rate > 0 && unit(rng) < profile.scene_change_rate) {
      mean = profile.i_size_mean;
      phase = 0;
    } else if (profile.b_frames && phase % 3 != 0) {
      mean = profile.b_size_mean;
    } else {
      mean = profile.p_size_mean;
    }
    s.sizes.push_back(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(draw(mean)))));
    phase = (phase + 1) % profile.gop_length;
  }
  return s;
}

/// The eleven fixed profiles behind standard_benchmark(). Every pair differs
/// in at least one of GOP length, I/P size ratio, and scene-change rate.
inline std::vector<ClassProfile> standard_profiles() {
  return {
      {"movies", 48, 90000, 9000, 3000, 0.25, 0.004, true},
      {"entertainment", 30, 70000, 14000, 5000, 0.30, 0.020, false},
      {"cooking", 60, 60000, 4000, 1500, 0.15, 0.002, false},
      {"gaming", 120, 50000, 20000, 8000, 0.10, 0.000, false},
      {"technology", 24, 40000, 5000, 2000, 0.20, 0.008, true},
      {"knowledge", 90, 45000, 3000, 1200, 0.12, 0.001, true},
      {"music", 15, 55000, 11000, 4000, 0.35, 0.040, false},
      {"sports", 32, 110000, 30000, 12000, 0.30, 0.015, true},
      {"beauty", 72, 65000, 8000, 2500, 0.20, 0.006, false},
      {"news", 36, 75000, 6000, 2200, 0.18, 0.030, true},
      {"education", 250, 35000, 2500, 1000, 0.10, 0.003, false},
  };
}

/// Seeded labeled dataset of `clips_per_class` clips for the first
/// `n_classes` standard profiles.
inline LabeledDataset standard_benchmark(std::size_t n_classes, std::size_t clips_per_class, std::size_t n_frames,
                                         std::uint64_t seed) {
  const auto profiles = standard_profiles();
  if (n_classes < 2 || n_classes > profiles.size())
    fail(ErrorCode::BadProfile, "n_classes must be in [2, " + std::to_string(profiles.size()) + "]");
  if (clips_per_class < 1) fail(ErrorCode::BadProfile, "clips_per_class must be >= 1");
  LabeledDataset ds;
  for (std::size_t c = 0; c < n_classes; ++c) ds.class_names.push_back(profiles[c].name);
  for (std::size_t c = 0; c < n_classes; ++c)
    for (std::size_t k = 0; k < clips_per_class; ++k) {
      auto series = generate(profiles[c], n_frames, mix_seed(seed ^ mix_seed(c * 1000003ULL + k)));
      series.source_id = profiles[c].name + "_" + std::to_string(k);
      ds.items.push_back({std::move(series), c});
    }
  return ds;
}

}  // namespace fsc::datagen
