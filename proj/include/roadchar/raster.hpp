#pragma once

// Core raster and geometry value types: 8-bit images, 16-bit depth maps,
// binary masks, normalized polygons and extracted instances.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "roadchar/error.hpp"

namespace roadchar {

struct Size {
  int width = 0;
  int height = 0;

  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  friend bool operator==(const Size&, const Size&) = default;
};

namespace detail {

inline void require_positive(Size size, const char* what) {
  if (size.width <= 0 || size.height <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " dimensions must be positive, got " +
                    std::to_string(size.width) + "x" + std::to_string(size.height));
  }
}

}  // namespace detail

/// Row-major 8-bit image with 1 or 3 interleaved channels.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0)
      : size_{width, height}, channels_(channels) {
    detail::require_positive(size_, "image");
    if (channels != 1 && channels != 3) {
      throw Error(ErrorCode::kInvalidArgument, "image channels must be 1 or 3");
    }
    samples_.assign(size_.area() * static_cast<std::size_t>(channels), fill);
  }
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> samples)
      : RasterImage(width, height, channels) {
    if (samples.size() != samples_.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "image sample count does not match dimensions");
    }
    samples_ = std::move(samples);
  }

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  int channels() const { return channels_; }
  Size size() const { return size_; }
  bool empty() const { return samples_.empty(); }

  std::uint8_t& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return samples_[index(x, y, c)]; }

  const std::vector<std::uint8_t>& samples() const { return samples_; }
  std::vector<std::uint8_t>& samples() { return samples_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  Size size_{};
  int channels_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// Row-major depth samples in millimeters. A sample of `kMissing` means the
/// sensor produced no reading there; it is never interpolated.
class DepthMap {
 public:
  static constexpr std::uint16_t kMissing = 0;

  DepthMap() = default;
  DepthMap(int width, int height, std::uint16_t fill = kMissing) : size_{width, height} {
    detail::require_positive(size_, "depth map");
    samples_.assign(size_.area(), fill);
  }
  DepthMap(int width, int height, std::vector<std::uint16_t> samples) : DepthMap(width, height) {
    if (samples.size() != samples_.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "depth sample count does not match dimensions");
    }
    samples_ = std::move(samples);
  }

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }

  std::uint16_t& at(int x, int y) { return samples_[index(x, y)]; }
  std::uint16_t at(int x, int y) const { return samples_[index(x, y)]; }
  bool valid(int x, int y) const { return at(x, y) != kMissing; }

  const std::vector<std::uint16_t>& samples() const { return samples_; }
  std::vector<std::uint16_t>& samples() { return samples_; }

  std::size_t valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [](auto s) { return s != kMissing; }));
  }
  double valid_fraction() const {
    return samples_.empty() ? 0.0
                            : static_cast<double>(valid_count()) /
                                  static_cast<double>(samples_.size());
  }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
           static_cast<std::size_t>(x);
  }

  Size size_{};
  std::vector<std::uint16_t> samples_;
};

/// Row-major boolean occupancy, one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : size_{width, height} {
    detail::require_positive(size_, "mask");
    bits_.assign(size_.area(), 0);
  }

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < size_.width && y < size_.height && at(x, y);
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

  BinaryMask& operator|=(const BinaryMask& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
    return *this;
  }

  /// Removes every pixel set in `other`.
  BinaryMask& subtract(const BinaryMask& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= static_cast<std::uint8_t>(!other.bits_[i]);
    return *this;
  }

  void require_same_size(const BinaryMask& other) const {
    if (other.size_ != size_) {
      throw Error(ErrorCode::kDimensionMismatch, "mask dimensions differ");
    }
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) +
           static_cast<std::size_t>(x);
  }

  Size size_{};
  std::vector<std::uint8_t> bits_;
};

struct PointD {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointD&, const PointD&) = default;
};

/// Inclusive pixel bounds.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = -1;
  int y_max = -1;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Closed polygon with vertices in normalized [0,1] image coordinates.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<PointD> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) {
      throw Error(ErrorCode::kDegeneratePolygon, "polygon needs at least 3 vertices");
    }
    for (const auto& v : vertices_) {
      if (!(v.x >= 0.0 && v.x <= 1.0 && v.y >= 0.0 && v.y <= 1.0)) {
        throw Error(ErrorCode::kOutOfRangeCoordinate, "polygon vertex outside [0,1]");
      }
    }
  }

  const std::vector<PointD>& vertices() const { return vertices_; }

  std::vector<PointD> to_pixels(Size frame) const {
    std::vector<PointD> out;
    out.reserve(vertices_.size());
    for (const auto& v : vertices_) out.push_back({v.x * frame.width, v.y * frame.height});
    return out;
  }

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<PointD> vertices_;
};

/// One connected region of a segmentation mask.
struct Instance {
  int id = 0;
  BinaryMask mask;
  std::size_t pixel_area = 0;
  std::vector<PointD> contour;  // pixel coordinates of boundary pixel centers
  double contour_area = 0.0;
  BBox bbox;
  PointD centroid;
};

}  // namespace roadchar
