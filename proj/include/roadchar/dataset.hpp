#pragma once

// Dataset preparation for RGB-depth pairs: drop blank captures, expand each
// pair into an augmentation family, resize, and split train/test without
// separating a family.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "roadchar/error.hpp"
#include "roadchar/image_ops.hpp"
#include "roadchar/random.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

enum class AugmentKind { kOriginal, kSaturation, kMirror, kSaturationMirror, kRandom };

inline const char* to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kOriginal: return "original";
    case AugmentKind::kSaturation: return "saturation";
    case AugmentKind::kMirror: return "mirror";
    case AugmentKind::kSaturationMirror: return "saturation_mirror";
    case AugmentKind::kRandom: return "random";
  }
  return "unknown";
}

/// Parameters drawn for the random variant.
struct RandomAugmentParams {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double rotation_deg = 0.0;
  bool flip = false;
};

struct Provenance {
  std::string family_id;  // source_id of the original capture
  AugmentKind kind = AugmentKind::kOriginal;
  std::optional<std::uint64_t> seed;
  std::optional<RandomAugmentParams> random;
};

struct FramePair {
  RasterImage rgb;
  DepthMap depth;
  std::string source_id;
  Provenance provenance;

  static FramePair original(std::string id, RasterImage rgb, DepthMap depth) {
    if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "source_id must be non-empty");
    if (rgb.size() != depth.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "rgb and depth of '" + id + "' differ in size");
    }
    FramePair p{std::move(rgb), std::move(depth), id, {}};
    p.provenance.family_id = std::move(id);
    return p;
  }
};

/// Saturation factor for the fixed saturation variants.
inline constexpr double kSaturationFactor = 1.5;

struct RandomAugmentRanges {
  double brightness = 0.25;    // factor in [1-b, 1+b]
  double contrast = 0.25;      // factor in [1-c, 1+c]
  double rotation_deg = 15.0;  // angle in [-r, r]
  double saturation = 0.30;    // factor in [1-s, 1+s]
  double flip_probability = 0.5;
};

/// Drops pairs whose missing-depth fraction is >= threshold. The default 1.0
/// removes only captures with no depth reading at all.
inline std::vector<FramePair> clean(std::vector<FramePair> pairs,
                                    double zero_fraction_threshold = 1.0) {
  if (!(zero_fraction_threshold > 0.0 && zero_fraction_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "zero fraction threshold must be in (0, 1]");
  }
  std::erase_if(pairs, [&](const FramePair& p) {
    return 1.0 - p.depth.valid_fraction() >= zero_fraction_threshold;
  });
  return pairs;
}

inline RasterImage apply_photometric(const RasterImage& rgb, const RandomAugmentParams& p) {
  RasterImage out = ops::adjust_brightness(rgb, p.brightness);
  out = ops::adjust_contrast(out, p.contrast);
  return ops::adjust_saturation(out, p.saturation);
}

inline RandomAugmentParams draw_random_params(std::uint64_t seed, std::string_view source_id,
                                              const RandomAugmentRanges& ranges = {}) {
  Rng rng(derive_seed(seed, source_id));
  RandomAugmentParams p;
  p.brightness = rng.uniform(1.0 - ranges.brightness, 1.0 + ranges.brightness);
  p.contrast = rng.uniform(1.0 - ranges.contrast, 1.0 + ranges.contrast);
  p.rotation_deg = rng.uniform(-ranges.rotation_deg, ranges.rotation_deg);
  p.flip = rng.coin(ranges.flip_probability);
  p.saturation = rng.uniform(1.0 - ranges.saturation, 1.0 + ranges.saturation);
  return p;
}

namespace detail {

inline FramePair variant(const FramePair& src, AugmentKind kind, std::uint64_t seed,
                         RasterImage rgb, DepthMap depth) {
  FramePair out{std::move(rgb), std::move(depth), src.source_id + "__" + to_string(kind), {}};
  out.provenance.family_id = src.provenance.family_id.empty() ? src.source_id : src.provenance.family_id;
  out.provenance.kind = kind;
  out.provenance.seed = seed;
  return out;
}

}  // namespace detail

/// The four augmentation variants of a pair, in fixed order: saturation,
/// mirror (RGB and depth), saturation+mirror, seeded random combination.
inline std::vector<FramePair> augment(const FramePair& pair, std::uint64_t seed,
                                      const RandomAugmentRanges& ranges = {}) {
  std::vector<FramePair> out;
  out.reserve(4);
  const RasterImage saturated = ops::adjust_saturation(pair.rgb, kSaturationFactor);
  out.push_back(detail::variant(pair, AugmentKind::kSaturation, seed, saturated, pair.depth));
  out.push_back(detail::variant(pair, AugmentKind::kMirror, seed, ops::mirror_horizontal(pair.rgb),
                                ops::mirror_horizontal(pair.depth)));
  out.push_back(detail::variant(pair, AugmentKind::kSaturationMirror, seed,
                                ops::mirror_horizontal(saturated), ops::mirror_horizontal(pair.depth)));

  const auto params = draw_random_params(seed, pair.source_id, ranges);
  RasterImage rgb = ops::rotate(apply_photometric(pair.rgb, params), params.rotation_deg);
  DepthMap depth = ops::rotate(pair.depth, params.rotation_deg);
  if (params.flip) {
    rgb = ops::mirror_horizontal(rgb);
    depth = ops::mirror_horizontal(depth);
  }
  out.push_back(detail::variant(pair, AugmentKind::kRandom, seed, std::move(rgb), std::move(depth)));
  out.back().provenance.random = params;
  return out;
}

/// RGB resampled bilinearly, depth by nearest neighbour.
inline FramePair resize_pair(const FramePair& pair, Size target) {
  detail::require_positive(target, "resize target");
  FramePair out = pair;
  if (pair.rgb.size() != target) out.rgb = ops::resize_bilinear(pair.rgb, target);
  if (pair.depth.size() != target) out.depth = ops::resize_nearest(pair.depth, target);
  return out;
}

struct SplitManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> test_families;
  std::uint64_t seed = 0;
  std::size_t family_count = 0;
};

inline std::string family_of(const FramePair& p) {
  return p.provenance.family_id.empty() ? p.source_id : p.provenance.family_id;
}

/// Chooses `test_count` families by a seeded shuffle of the sorted family ids;
/// every pair follows its family. Pair order within each list follows input.
inline SplitManifest split(std::span<const FramePair> pairs, std::size_t test_count,
                           std::uint64_t seed) {
  std::set<std::string> family_set;
  for (const auto& p : pairs) family_set.insert(family_of(p));
  std::vector<std::string> families(family_set.begin(), family_set.end());
  if (test_count > 0 && test_count >= families.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "test_count " + std::to_string(test_count) + " needs more than " +
                    std::to_string(families.size()) + " families");
  }
  Rng rng(splitmix64(seed));
  for (std::size_t i = families.size(); i > 1; --i) {
    std::swap(families[i - 1], families[rng.below(i)]);
  }
  SplitManifest m;
  m.seed = seed;
  m.family_count = families.size();
  std::set<std::string> test(families.begin(), families.begin() + static_cast<std::ptrdiff_t>(test_count));
  m.test_families.assign(test.begin(), test.end());
  for (const auto& p : pairs) {
    (test.count(family_of(p)) ? m.test_ids : m.train_ids).push_back(p.source_id);
  }
  return m;
}

}  // namespace roadchar
