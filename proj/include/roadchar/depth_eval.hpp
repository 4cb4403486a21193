#pragma once

// Predicted-vs-ground-truth depth comparison. Only pixels with a valid
// ground-truth reading contribute; prediction values elsewhere are ignored.

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "roadchar/depth.hpp"
#include "roadchar/error.hpp"
#include "roadchar/png_io.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

enum class DepthUnits { kNormalized, kMillimeters };

inline const char* to_string(DepthUnits units) {
  return units == DepthUnits::kMillimeters ? "millimeters" : "normalized";
}

struct FrameRmse {
  std::string frame_id;
  double rmse = 0.0;
  std::size_t valid_pixels = 0;
};

struct DepthEvalResult {
  DepthUnits units = DepthUnits::kNormalized;
  std::vector<FrameRmse> frames;
  double mean_rmse = 0.0;
};

namespace detail {

template <typename PredAt, typename GtValid, typename GtAt>
FrameRmse rmse_impl(Size pred_size, Size gt_size, PredAt pred_at, GtValid gt_valid, GtAt gt_at) {
  if (pred_size != gt_size) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and ground truth differ in size");
  }
  FrameRmse out;
  double sum_sq = 0.0;
  for (int y = 0; y < gt_size.height; ++y) {
    for (int x = 0; x < gt_size.width; ++x) {
      if (!gt_valid(x, y)) continue;
      const double diff = pred_at(x, y) - gt_at(x, y);
      sum_sq += diff * diff;
      ++out.valid_pixels;
    }
  }
  if (out.valid_pixels == 0) {
    throw Error(ErrorCode::kNoValidPixels, "ground truth has no valid depth samples");
  }
  out.rmse = std::sqrt(sum_sq / static_cast<double>(out.valid_pixels));
  return out;
}

}  // namespace detail

/// RMSE in normalized units. Prediction validity is not consulted: a
/// prediction sample marked missing contributes its stored value (0).
inline double rmse(const NormalizedDepth& pred, const NormalizedDepth& gt) {
  return detail::rmse_impl(
             pred.size(), gt.size(), [&](int x, int y) { return pred.value(x, y); },
             [&](int x, int y) { return gt.valid(x, y); },
             [&](int x, int y) { return gt.value(x, y); })
      .rmse;
}

/// RMSE in millimeters on raw sensor samples.
inline double rmse(const DepthMap& pred, const DepthMap& gt) {
  return detail::rmse_impl(
             pred.size(), gt.size(), [&](int x, int y) { return double(pred.at(x, y)); },
             [&](int x, int y) { return gt.valid(x, y); },
             [&](int x, int y) { return double(gt.at(x, y)); })
      .rmse;
}

inline FrameRmse frame_rmse(const std::string& frame_id, const DepthMap& pred, const DepthMap& gt,
                            DepthUnits units, double range_mm = kDefaultDepthRangeMm) {
  FrameRmse r;
  if (units == DepthUnits::kMillimeters) {
    r = detail::rmse_impl(
        pred.size(), gt.size(), [&](int x, int y) { return double(pred.at(x, y)); },
        [&](int x, int y) { return gt.valid(x, y); },
        [&](int x, int y) { return double(gt.at(x, y)); });
  } else {
    const auto p = normalize_depth(pred, range_mm);
    const auto g = normalize_depth(gt, range_mm);
    r = detail::rmse_impl(
        p.size(), g.size(), [&](int x, int y) { return p.value(x, y); },
        [&](int x, int y) { return g.valid(x, y); }, [&](int x, int y) { return g.value(x, y); });
  }
  r.frame_id = frame_id;
  return r;
}

/// Unweighted mean of per-frame RMSE values, in the given frame order.
inline DepthEvalResult aggregate(std::vector<FrameRmse> frames, DepthUnits units) {
  DepthEvalResult out;
  out.units = units;
  out.frames = std::move(frames);
  if (!out.frames.empty()) {
    double sum = 0.0;
    for (const auto& f : out.frames) sum += f.rmse;
    out.mean_rmse = sum / static_cast<double>(out.frames.size());
  }
  return out;
}

inline std::set<std::string> png_ids(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  }
  std::set<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      ids.insert(entry.path().stem().string());
    }
  }
  return ids;
}

/// Pairs `<id>.png` files from the two directories and evaluates each frame.
inline DepthEvalResult evaluate_set(const std::filesystem::path& pred_dir,
                                    const std::filesystem::path& gt_dir,
                                    DepthUnits units = DepthUnits::kNormalized,
                                    double range_mm = kDefaultDepthRangeMm) {
  const auto pred_ids = png_ids(pred_dir);
  const auto gt_ids = png_ids(gt_dir);
  std::string unmatched;
  for (const auto& id : pred_ids) {
    if (!gt_ids.count(id)) unmatched += (unmatched.empty() ? "" : ",") + ("pred:" + id);
  }
  for (const auto& id : gt_ids) {
    if (!pred_ids.count(id)) unmatched += (unmatched.empty() ? "" : ",") + ("gt:" + id);
  }
  if (!unmatched.empty()) {
    throw Error(ErrorCode::kMissingCounterpart, "unmatched frame ids: " + unmatched);
  }
  std::vector<FrameRmse> frames;
  for (const auto& id : gt_ids) {
    frames.push_back(frame_rmse(id, png::read_depth(pred_dir / (id + ".png")),
                                png::read_depth(gt_dir / (id + ".png")), units, range_mm));
  }
  return aggregate(std::move(frames), units);
}

}  // namespace roadchar
