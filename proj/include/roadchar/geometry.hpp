#pragma once

// Mask geometry: polygon rasterization, connected components, outer border
// tracing and the Euclidean surrounding band used for depth comparison.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "roadchar/error.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

enum class Connectivity { kFour = 4, kEight = 8 };

/// Absolute shoelace area of a closed vertex loop.
inline double shoelace_area(std::span<const PointD> loop) {
  if (loop.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    twice += loop[j].x * loop[i].y - loop[i].x * loop[j].y;
  }
  return std::abs(twice) * 0.5;
}

/// Rasterizes a polygon given in pixel coordinates. A pixel is set iff its
/// center (x+0.5, y+0.5) is inside under the even-odd rule; centers on a left
/// or top edge count as inside, on a right or bottom edge as outside.
/// Vertices may lie outside the frame; the result is clipped.
inline BinaryMask rasterize_pixels(std::span<const PointD> vertices, Size frame) {
  BinaryMask mask(frame.width, frame.height);
  const std::size_t n = vertices.size();
  std::vector<double> crossings;
  for (int y = 0; y < frame.height; ++y) {
    const double cy = y + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const PointD& a = vertices[i];
      const PointD& b = vertices[j];
      if ((a.y > cy) != (b.y > cy)) {
        crossings.push_back((b.x - a.x) * (cy - a.y) / (b.y - a.y) + a.x);
      }
    }
    if (crossings.empty()) continue;
    std::sort(crossings.begin(), crossings.end());
    // Inside iff an odd number of crossings lie strictly right of the center.
    std::size_t right = 0;  // index of the first crossing > cx
    for (int x = 0; x < frame.width; ++x) {
      const double cx = x + 0.5;
      while (right < crossings.size() && crossings[right] <= cx) ++right;
      if ((crossings.size() - right) % 2 == 1) mask.set(x, y);
    }
  }
  return mask;
}

inline BinaryMask rasterize_polygon(const Polygon& poly, Size frame) {
  detail::require_positive(frame, "raster");
  std::vector<PointD> pts = poly.to_pixels(frame);
  std::vector<PointD> distinct;
  for (const auto& p : pts) {
    if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorCode::kDegeneratePolygon,
                "polygon has fewer than 3 distinct vertices after denormalization");
  }
  return rasterize_pixels(pts, frame);
}

/// Labels connected regions. Each returned instance carries its own
/// full-frame mask, pixel_area, bbox and centroid; contours are not traced.
/// Ordered by (bbox.y_min, bbox.x_min), then by first pixel in raster order.
inline std::vector<Instance> connected_components(const BinaryMask& mask,
                                                  Connectivity connectivity = Connectivity::kEight) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(mask.bits().size(), -1);
  std::vector<Instance> out;
  std::vector<std::size_t> first_pixel;
  std::vector<std::pair<int, int>> stack;

  static constexpr std::array<std::array<int, 2>, 8> kOffsets{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
  const std::size_t n_offsets = connectivity == Connectivity::kEight ? 8 : 4;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!mask.bits()[idx] || label[idx] >= 0) continue;

      const int id = static_cast<int>(out.size());
      Instance inst;
      inst.mask = BinaryMask(w, h);
      inst.bbox = {x, y, x, y};
      double sum_x = 0.0;
      double sum_y = 0.0;

      label[idx] = id;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        auto [px, py] = stack.back();
        stack.pop_back();
        inst.mask.set(px, py);
        ++inst.pixel_area;
        sum_x += px;
        sum_y += py;
        inst.bbox.x_min = std::min(inst.bbox.x_min, px);
        inst.bbox.x_max = std::max(inst.bbox.x_max, px);
        inst.bbox.y_min = std::min(inst.bbox.y_min, py);
        inst.bbox.y_max = std::max(inst.bbox.y_max, py);
        for (std::size_t k = 0; k < n_offsets; ++k) {
          const int nx = px + kOffsets[k][0];
          const int ny = py + kOffsets[k][1];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (mask.bits()[nidx] && label[nidx] < 0) {
            label[nidx] = id;
            stack.emplace_back(nx, ny);
          }
        }
      }
      const double n = static_cast<double>(inst.pixel_area);
      inst.centroid = {sum_x / n + 0.5, sum_y / n + 0.5};
      out.push_back(std::move(inst));
      first_pixel.push_back(idx);
    }
  }

  std::vector<std::size_t> order(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ba = out[a].bbox;
    const auto& bb = out[b].bbox;
    if (ba.y_min != bb.y_min) return ba.y_min < bb.y_min;
    if (ba.x_min != bb.x_min) return ba.x_min < bb.x_min;
    return first_pixel[a] < first_pixel[b];
  });
  std::vector<Instance> sorted;
  sorted.reserve(out.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.push_back(std::move(out[order[i]]));
    sorted.back().id = static_cast<int>(i);
  }
  return sorted;
}

struct TracedContour {
  std::vector<PointD> vertices;  // boundary pixel centers, closed implicitly
  double area = 0.0;
};

/// Follows the outer border of a single component through its boundary pixel
/// centers (8-neighbour border following, clockwise in image coordinates).
/// Inner borders of holes are ignored.
inline TracedContour trace_contour(const BinaryMask& component) {
  const int w = component.width();
  const int h = component.height();
  int sx = -1;
  int sy = -1;
  for (int y = 0; y < h && sy < 0; ++y) {
    for (int x = 0; x < w; ++x) {
      if (component.at(x, y)) {
        sx = x;
        sy = y;
        break;
      }
    }
  }
  if (sy < 0) throw Error(ErrorCode::kEmptyComponent, "cannot trace an empty mask");

  // Neighbour directions in clockwise order (image y points down), starting east.
  static constexpr std::array<std::array<int, 2>, 8> kDir{
      {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  auto dir_of = [](int dx, int dy) {
    for (int d = 0; d < 8; ++d) {
      if (kDir[d][0] == dx && kDir[d][1] == dy) return d;
    }
    return -1;
  };
  auto fg = [&](int x, int y) { return component.contains(x, y); };

  TracedContour out;
  auto emit = [&](int x, int y) { out.vertices.push_back({x + 0.5, y + 0.5}); };

  // The west neighbour of the raster-first pixel is background. Search
  // clockwise from it for the first foreground neighbour.
  int first_dir = -1;
  for (int k = 1; k <= 8; ++k) {
    const int d = (4 + k) % 8;
    if (fg(sx + kDir[d][0], sy + kDir[d][1])) {
      first_dir = d;
      break;
    }
  }
  if (first_dir < 0) {
    emit(sx, sy);
    return out;
  }
  const int fx = sx + kDir[first_dir][0];
  const int fy = sy + kDir[first_dir][1];

  int px = fx;  // previous pixel (search origin)
  int py = fy;
  int cx = sx;  // current border pixel
  int cy = sy;
  while (true) {
    emit(cx, cy);
    // Counter-clockwise search around the current pixel, starting just after
    // the previous one.
    const int back = dir_of(px - cx, py - cy);
    int nx = cx;
    int ny = cy;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back - k + 8) % 8;
      if (fg(cx + kDir[d][0], cy + kDir[d][1])) {
        nx = cx + kDir[d][0];
        ny = cy + kDir[d][1];
        break;
      }
    }
    if (nx == sx && ny == sy && cx == fx && cy == fy) break;
    px = cx;
    py = cy;
    cx = nx;
    cy = ny;
  }
  out.area = shoelace_area(out.vertices);
  return out;
}

/// Components plus traced contours: the full instance extraction step.
inline std::vector<Instance> extract_instances(const BinaryMask& mask,
                                               Connectivity connectivity = Connectivity::kEight) {
  auto instances = connected_components(mask, connectivity);
  for (auto& inst : instances) {
    auto traced = trace_contour(inst.mask);
    inst.contour = std::move(traced.vertices);
    inst.contour_area = traced.area;
  }
  return instances;
}

namespace detail {

// Stand-in for "no foreground pixel"; large but exact when added to q^2.
inline constexpr double kFarAway = 1e12;

// Exact 1-D squared distance transform over sampled values f (lower
// envelope of parabolas rooted at each sample).
inline void distance_transform_1d(std::span<const double> f, std::span<double> d,
                                  std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  auto intersect = [&](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
  };
  int k = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Squared Euclidean distance (pixel-center to pixel-center) from every pixel
/// in `window` to the nearest set pixel of `mask` inside that window.
inline std::vector<double> squared_distance_in_window(const BinaryMask& mask, BBox window) {
  const int ww = window.width();
  const int wh = window.height();
  std::vector<double> grid(static_cast<std::size_t>(ww) * wh, detail::kFarAway);
  for (int y = 0; y < wh; ++y) {
    for (int x = 0; x < ww; ++x) {
      if (mask.at(window.x_min + x, window.y_min + y)) grid[static_cast<std::size_t>(y) * ww + x] = 0.0;
    }
  }
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> f(static_cast<std::size_t>(std::max(ww, wh)));
  std::vector<double> d(f.size());
  for (int x = 0; x < ww; ++x) {
    for (int y = 0; y < wh; ++y) f[y] = grid[static_cast<std::size_t>(y) * ww + x];
    detail::distance_transform_1d(std::span(f.data(), wh), std::span(d.data(), wh), v, z);
    for (int y = 0; y < wh; ++y) grid[static_cast<std::size_t>(y) * ww + x] = d[y];
  }
  for (int y = 0; y < wh; ++y) {
    std::span<double> row(grid.data() + static_cast<std::size_t>(y) * ww, ww);
    std::copy(row.begin(), row.end(), f.begin());
    detail::distance_transform_1d(std::span(f.data(), ww), std::span(d.data(), ww), v, z);
    std::copy(d.begin(), d.begin() + ww, row.begin());
  }
  return grid;
}

/// Pixels within Euclidean `radius` of the instance, excluding every pothole
/// pixel in `all_potholes`. Never intersects the instance itself.
inline BinaryMask surrounding_band(const BinaryMask& instance_mask, const BinaryMask& all_potholes,
                                   int radius) {
  if (radius < 1) throw Error(ErrorCode::kInvalidArgument, "band radius must be >= 1");
  instance_mask.require_same_size(all_potholes);
  const int w = instance_mask.width();
  const int h = instance_mask.height();
  BinaryMask band(w, h);

  BBox box{w, h, -1, -1};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!instance_mask.at(x, y)) continue;
      box.x_min = std::min(box.x_min, x);
      box.x_max = std::max(box.x_max, x);
      box.y_min = std::min(box.y_min, y);
      box.y_max = std::max(box.y_max, y);
    }
  }
  if (box.x_max < 0) return band;

  const BBox window{std::max(0, box.x_min - radius), std::max(0, box.y_min - radius),
                    std::min(w - 1, box.x_max + radius), std::min(h - 1, box.y_max + radius)};
  const auto dist2 = squared_distance_in_window(instance_mask, window);
  const double r2 = static_cast<double>(radius) * radius;
  const int ww = window.width();
  for (int y = window.y_min; y <= window.y_max; ++y) {
    for (int x = window.x_min; x <= window.x_max; ++x) {
      const double d2 = dist2[static_cast<std::size_t>(y - window.y_min) * ww + (x - window.x_min)];
      if (d2 <= r2 && !instance_mask.at(x, y) && !all_potholes.at(x, y)) band.set(x, y);
    }
  }
  return band;
}

/// Mirror about the vertical axis.
inline BinaryMask mirror_horizontal(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) out.set(mask.width() - 1 - x, y);
    }
  }
  return out;
}

inline BinaryMask union_of(std::span<const Instance> instances, Size frame) {
  BinaryMask out(frame.width, frame.height);
  for (const auto& inst : instances) out |= inst.mask;
  return out;
}

}  // namespace roadchar
