#pragma once

// Per-pothole and per-frame characterization: contour areas, damage
// percentage, pothole vs. surrounding-band depth and relative depth.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roadchar/depth.hpp"
#include "roadchar/error.hpp"
#include "roadchar/geometry.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

enum class RelativeDepthMode {
  kDifference,  // (p_d - s_d) * 100
  kRatio,       // (p_d - s_d) / s_d * 100
};

inline const char* to_string(RelativeDepthMode mode) {
  return mode == RelativeDepthMode::kRatio ? "ratio" : "difference";
}

struct DepthStats {
  double p_d = 0.0;
  double s_d = 0.0;
  double valid_pothole_fraction = 0.0;
  double valid_band_fraction = 0.0;
  std::size_t pothole_pixels = 0;
  std::size_t band_pixels = 0;
};

struct CharacterizeConfig {
  int band_radius = 15;
  double min_valid_fraction = 0.2;
  RelativeDepthMode rpd_mode = RelativeDepthMode::kDifference;
};

struct PotholeRecord {
  Instance instance;
  std::optional<DepthStats> depth_stats;
  std::optional<double> rp_d_ratio;  // absent when s_d == 0
  std::optional<double> rp_d_difference;
  double severity = 0.0;
  std::string warning;  // set when depth could not be characterized
};

struct FrameReport {
  std::string frame_id;
  double frame_area = 0.0;
  RelativeDepthMode rpd_mode = RelativeDepthMode::kDifference;
  std::vector<PotholeRecord> potholes;
  double total_pothole_area = 0.0;
  double damage_percent = 0.0;
};

/// Fixed-point text with `decimals` places, as shown in report tables.
inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  if (s.rfind("-0", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace detail {

struct MaskedMean {
  double mean = 0.0;
  std::size_t valid = 0;
  std::size_t region = 0;

  double valid_fraction() const {
    return region == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(region);
  }
};

// Mean over valid samples inside `region`, accumulated relative to the first
// valid sample so a constant region returns that constant exactly.
inline MaskedMean masked_mean(const BinaryMask& region, const NormalizedDepth& depth) {
  MaskedMean out;
  double reference = 0.0;
  double offset_sum = 0.0;
  for (int y = 0; y < region.height(); ++y) {
    for (int x = 0; x < region.width(); ++x) {
      if (!region.at(x, y)) continue;
      ++out.region;
      if (!depth.valid(x, y)) continue;
      if (out.valid == 0) reference = depth.value(x, y);
      offset_sum += depth.value(x, y) - reference;
      ++out.valid;
    }
  }
  if (out.valid > 0) out.mean = reference + offset_sum / static_cast<double>(out.valid);
  return out;
}

}  // namespace detail

/// Mean normalized depth over the instance (p_d) and over its surrounding
/// band (s_d). Throws InsufficientDepthCoverage when either region has a
/// valid fraction below `min_valid_fraction`.
inline DepthStats depth_stats(const Instance& instance, const BinaryMask& all_potholes,
                              const NormalizedDepth& depth, int band_radius,
                              double min_valid_fraction = 0.2) {
  if (instance.mask.size() != depth.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "instance mask and depth field differ in size");
  }
  const BinaryMask band = surrounding_band(instance.mask, all_potholes, band_radius);
  const auto inside = detail::masked_mean(instance.mask, depth);
  const auto around = detail::masked_mean(band, depth);

  auto check = [&](const detail::MaskedMean& m, const char* region) {
    if (m.valid == 0 || m.valid_fraction() < min_valid_fraction) {
      throw Error(ErrorCode::kInsufficientDepthCoverage,
                  std::string(region) + " valid fraction " + format_fixed(m.valid_fraction(), 4) +
                      " below " + format_fixed(min_valid_fraction, 4));
    }
  };
  check(inside, "pothole");
  check(around, "band");

  return {inside.mean, around.mean, inside.valid_fraction(), around.valid_fraction(),
          inside.region, around.region};
}

inline double relative_depth(double p_d, double s_d,
                             RelativeDepthMode mode = RelativeDepthMode::kDifference) {
  if (mode == RelativeDepthMode::kDifference) return (p_d - s_d) * 100.0;
  if (s_d == 0.0) {
    throw Error(ErrorCode::kZeroSurroundDepth, "ratio mode needs a nonzero surrounding depth");
  }
  return (p_d - s_d) / s_d * 100.0;
}

/// Ordering score only: contour_area * max(rp_d_difference, 0).
inline double severity(const PotholeRecord& record) {
  if (!record.rp_d_difference) return 0.0;
  return record.instance.contour_area * std::max(*record.rp_d_difference, 0.0);
}

inline double damage_percent(double total_area, double frame_area) {
  return 100.0 * total_area / frame_area;
}

/// Totals the records and orders them by severity, highest first (stable).
inline FrameReport summarize_frame(std::string frame_id, double frame_area,
                                   std::vector<PotholeRecord> records,
                                   RelativeDepthMode mode = RelativeDepthMode::kDifference) {
  if (!(frame_area > 0.0)) throw Error(ErrorCode::kInvalidArgument, "frame area must be positive");
  FrameReport report;
  report.frame_id = std::move(frame_id);
  report.frame_area = frame_area;
  report.rpd_mode = mode;
  for (auto& r : records) {
    r.severity = severity(r);
    report.total_pothole_area += r.instance.contour_area;
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const PotholeRecord& a, const PotholeRecord& b) { return a.severity > b.severity; });
  report.potholes = std::move(records);
  report.damage_percent = damage_percent(report.total_pothole_area, frame_area);
  return report;
}

namespace detail {

inline PotholeRecord characterize_instance(const Instance& inst, const BinaryMask& all_potholes,
                                           const NormalizedDepth& depth,
                                           const CharacterizeConfig& config) {
  PotholeRecord rec;
  rec.instance = inst;
  try {
    const auto stats =
        depth_stats(inst, all_potholes, depth, config.band_radius, config.min_valid_fraction);
    rec.depth_stats = stats;
    rec.rp_d_difference = relative_depth(stats.p_d, stats.s_d, RelativeDepthMode::kDifference);
    if (stats.s_d != 0.0) rec.rp_d_ratio = relative_depth(stats.p_d, stats.s_d, RelativeDepthMode::kRatio);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientDepthCoverage) throw;
    rec.warning = e.what();
  }
  return rec;
}

}  // namespace detail

/// Area-only report: no depth field available.
inline FrameReport frame_report(std::string frame_id, std::span<const Instance> instances,
                                double frame_area, const CharacterizeConfig& config = {}) {
  std::vector<PotholeRecord> records;
  records.reserve(instances.size());
  for (const auto& inst : instances) records.push_back(PotholeRecord{inst, {}, {}, {}, 0.0, {}});
  return summarize_frame(std::move(frame_id), frame_area, std::move(records), config.rpd_mode);
}

/// Full report with depth characterization. Coverage failures become
/// per-pothole warnings instead of failing the frame.
inline FrameReport frame_report(std::string frame_id, std::span<const Instance> instances,
                                double frame_area, const NormalizedDepth& depth,
                                const CharacterizeConfig& config = {}) {
  std::vector<PotholeRecord> records;
  records.reserve(instances.size());
  if (!instances.empty()) {
    const BinaryMask all = union_of(instances, instances.front().mask.size());
    for (const auto& inst : instances) {
      records.push_back(detail::characterize_instance(inst, all, depth, config));
    }
  }
  return summarize_frame(std::move(frame_id), frame_area, std::move(records), config.rpd_mode);
}

/// Headline relative depth in the report's configured mode.
inline std::optional<double> headline_rp_d(const PotholeRecord& record, RelativeDepthMode mode) {
  return mode == RelativeDepthMode::kRatio ? record.rp_d_ratio : record.rp_d_difference;
}

}  // namespace roadchar
