#pragma once

// Pixel-level transforms for RGB frames and depth maps. Photometric ops
// touch RGB only; geometric ops come in RGB (bilinear, black fill) and depth
// (nearest, missing fill) flavours so depth samples are never blended.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "roadchar/raster.hpp"

namespace roadchar::ops {

namespace detail {

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

inline double luma(const RasterImage& img, int x, int y) {
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

// Bilinear sample at continuous index coordinates, edge-clamped.
inline double bilinear(const RasterImage& img, double fx, double fy, int c) {
  fx = std::clamp(fx, 0.0, static_cast<double>(img.width() - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double ax = fx - x0;
  const double ay = fy - y0;
  const double top = img.at(x0, y0, c) + ax * (img.at(x1, y0, c) - img.at(x0, y0, c));
  const double bottom = img.at(x0, y1, c) + ax * (img.at(x1, y1, c) - img.at(x0, y1, c));
  return top + ay * (bottom - top);
}

}  // namespace detail

/// Blend each pixel with its luma: factor 0 is grayscale, 1 is identity.
inline RasterImage adjust_saturation(const RasterImage& img, double factor) {
  if (img.channels() != 3) return img;
  RasterImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double gray = detail::luma(img, x, y);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = detail::to_byte(gray + factor * (img.at(x, y, c) - gray));
    }
  }
  return out;
}

inline RasterImage adjust_brightness(const RasterImage& img, double factor) {
  RasterImage out = img;
  for (auto& s : out.samples()) s = detail::to_byte(s * factor);
  return out;
}

/// Scales deviation from the mean luma of the whole image.
inline RasterImage adjust_contrast(const RasterImage& img, double factor) {
  double mean = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      mean += img.channels() == 3 ? detail::luma(img, x, y) : img.at(x, y);
    }
  }
  mean /= static_cast<double>(img.size().area());
  RasterImage out = img;
  for (auto& s : out.samples()) s = detail::to_byte(mean + factor * (s - mean));
  return out;
}

inline RasterImage mirror_horizontal(const RasterImage& img) {
  RasterImage out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
    }
  }
  return out;
}

inline DepthMap mirror_horizontal(const DepthMap& depth) {
  DepthMap out(depth.width(), depth.height());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) out.at(depth.width() - 1 - x, y) = depth.at(x, y);
  }
  return out;
}

namespace detail {

// Maps an output pixel center to continuous source coordinates for a
// rotation by `degrees` about the frame center.
struct InverseRotation {
  double cos_t;
  double sin_t;
  double cx;
  double cy;

  InverseRotation(double degrees, Size size)
      : cos_t(std::cos(degrees * std::numbers::pi / 180.0)),
        sin_t(std::sin(degrees * std::numbers::pi / 180.0)),
        cx(size.width / 2.0),
        cy(size.height / 2.0) {}

  void source(int x, int y, double& sx, double& sy) const {
    const double dx = x + 0.5 - cx;
    const double dy = y + 0.5 - cy;
    sx = cos_t * dx - sin_t * dy + cx;
    sy = sin_t * dx + cos_t * dy + cy;
  }
};

}  // namespace detail

/// Bilinear rotation; pixels whose source falls outside the frame are black.
inline RasterImage rotate(const RasterImage& img, double degrees) {
  RasterImage out(img.width(), img.height(), img.channels(), 0);
  const detail::InverseRotation inv(degrees, img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double sx = 0.0;
      double sy = 0.0;
      inv.source(x, y, sx, sy);
      if (sx < 0.0 || sy < 0.0 || sx >= img.width() || sy >= img.height()) continue;
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = detail::to_byte(detail::bilinear(img, sx - 0.5, sy - 0.5, c));
      }
    }
  }
  return out;
}

/// Nearest-neighbour rotation; exposed regions become missing.
inline DepthMap rotate(const DepthMap& depth, double degrees) {
  DepthMap out(depth.width(), depth.height());
  const detail::InverseRotation inv(degrees, depth.size());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      double sx = 0.0;
      double sy = 0.0;
      inv.source(x, y, sx, sy);
      if (sx < 0.0 || sy < 0.0 || sx >= depth.width() || sy >= depth.height()) continue;
      out.at(x, y) = depth.at(static_cast<int>(sx), static_cast<int>(sy));
    }
  }
  return out;
}

/// Bilinear resampling with pixel-center alignment.
inline RasterImage resize_bilinear(const RasterImage& img, Size target) {
  RasterImage out(target.width, target.height, img.channels());
  const double scale_x = static_cast<double>(img.width()) / target.width;
  const double scale_y = static_cast<double>(img.height()) / target.height;
  for (int y = 0; y < target.height; ++y) {
    const double sy = (y + 0.5) * scale_y - 0.5;
    for (int x = 0; x < target.width; ++x) {
      const double sx = (x + 0.5) * scale_x - 0.5;
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = detail::to_byte(detail::bilinear(img, sx, sy, c));
    }
  }
  return out;
}

/// Nearest-neighbour resampling: every output sample is an input sample.
inline DepthMap resize_nearest(const DepthMap& depth, Size target) {
  DepthMap out(target.width, target.height);
  const double scale_x = static_cast<double>(depth.width()) / target.width;
  const double scale_y = static_cast<double>(depth.height()) / target.height;
  for (int y = 0; y < target.height; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * scale_y), depth.height() - 1);
    for (int x = 0; x < target.width; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * scale_x), depth.width() - 1);
      out.at(x, y) = depth.at(sx, sy);
    }
  }
  return out;
}

}  // namespace roadchar::ops
