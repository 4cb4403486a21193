#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "roadchar/error.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

/// Kinect V2 far range.
inline constexpr double kDefaultDepthRangeMm = 4500.0;

/// Depth in normalized [0,1] units with an explicit validity plane. Larger
/// values are farther from the camera.
class NormalizedDepth {
 public:
  NormalizedDepth() = default;
  NormalizedDepth(int width, int height, double fill = 0.0, bool valid = true)
      : size_{width, height} {
    detail::require_positive(size_, "depth field");
    values_.assign(size_.area(), fill);
    valid_.assign(size_.area(), valid ? 1 : 0);
  }

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }

  double value(int x, int y) const { return values_[index(x, y)]; }
  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }

  void set(int x, int y, double v) {
    values_[index(x, y)] = v;
    valid_[index(x, y)] = 1;
  }
  void set_missing(int x, int y) {
    values_[index(x, y)] = 0.0;
    valid_[index(x, y)] = 0;
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& validity() const { return valid_; }

  friend bool operator==(const NormalizedDepth&, const NormalizedDepth&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
           static_cast<std::size_t>(x);
  }

  Size size_{};
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

/// Valid samples map to clamp(mm / max_range_mm, 0, 1); missing stays missing.
inline NormalizedDepth normalize_depth(const DepthMap& depth,
                                       double max_range_mm = kDefaultDepthRangeMm) {
  if (!(max_range_mm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "depth range must be positive");
  }
  NormalizedDepth out(depth.width(), depth.height(), 0.0, false);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const std::uint16_t mm = depth.at(x, y);
      if (mm == DepthMap::kMissing) continue;
      out.set(x, y, std::clamp(static_cast<double>(mm) / max_range_mm, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace roadchar
