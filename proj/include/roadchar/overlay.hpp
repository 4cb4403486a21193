#pragma once

// Side-by-side visualization of a characterized frame: RGB with outlines and
// labels, colorized depth, and a blend of the two. Without depth only the
// RGB panel and a mask panel are drawn.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roadchar/characterize.hpp"
#include "roadchar/depth.hpp"
#include "roadchar/error.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct OverlayLabel {
  int instance_id = 0;
  std::string text;
  int x = 0;  // top-left within the first panel
  int y = 0;
};

struct Overlay {
  RasterImage image;
  std::vector<OverlayLabel> labels;
  int panels = 0;
};

namespace overlay_detail {

inline constexpr std::array<Rgb, 8> kPalette{{{230, 25, 75},
                                              {60, 180, 75},
                                              {255, 225, 25},
                                              {0, 130, 200},
                                              {245, 130, 48},
                                              {145, 30, 180},
                                              {70, 240, 240},
                                              {240, 50, 230}}};

// Viridis sampled at nine evenly spaced stops.
inline constexpr std::array<Rgb, 9> kViridis{{{68, 1, 84},
                                              {71, 44, 122},
                                              {59, 81, 139},
                                              {44, 113, 142},
                                              {33, 144, 141},
                                              {39, 173, 129},
                                              {92, 200, 99},
                                              {170, 220, 50},
                                              {253, 231, 37}}};

inline Rgb ramp(double t) {
  t = std::clamp(t, 0.0, 1.0) * (kViridis.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kViridis.size() - 2);
  const double f = t - static_cast<double>(i);
  auto mix = [f](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + (b - a) * f));
  };
  return {mix(kViridis[i].r, kViridis[i + 1].r), mix(kViridis[i].g, kViridis[i + 1].g),
          mix(kViridis[i].b, kViridis[i + 1].b)};
}

// 5x7 glyphs, one byte per row, low 5 bits used (bit 4 = leftmost column).
struct Glyph {
  char c;
  std::array<std::uint8_t, 7> rows;
};

inline constexpr std::array<Glyph, 22> kFont{{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'#', {0x0A, 0x0A, 0x1F, 0x0A, 0x1F, 0x0A, 0x0A}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
}};

inline constexpr int kGlyphW = 5, kGlyphH = 7, kAdvance = 6;

inline const Glyph* glyph(char c) {
  for (const auto& g : kFont) {
    if (g.c == c) return &g;
  }
  return nullptr;
}

inline void put(RasterImage& img, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  img.at(x, y, 0) = c.r;
  img.at(x, y, 1) = c.g;
  img.at(x, y, 2) = c.b;
}

inline int text_width(const std::string& s) {
  return s.empty() ? 0 : static_cast<int>(s.size()) * kAdvance - 1;
}

// Text on a dark backing box, clipped to [x0, x0+w).
inline void draw_text(RasterImage& img, int x, int y, const std::string& s, Rgb color, int x0, int w) {
  const Rgb backing{0, 0, 0};
  for (int yy = y - 1; yy <= y + kGlyphH; ++yy) {
    for (int xx = x - 1; xx <= x + text_width(s); ++xx) {
      if (xx >= x0 && xx < x0 + w) put(img, xx, yy, backing);
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Glyph* g = glyph(s[i]);
    if (!g) continue;
    const int gx = x + static_cast<int>(i) * kAdvance;
    for (int r = 0; r < kGlyphH; ++r) {
      for (int col = 0; col < kGlyphW; ++col) {
        if (((g->rows[r] >> (kGlyphW - 1 - col)) & 1) && gx + col >= x0 && gx + col < x0 + w) {
          put(img, gx + col, y + r, color);
        }
      }
    }
  }
}

inline bool on_outline(const BinaryMask& m, int x, int y) {
  if (!m.at(x, y)) return false;
  return !m.contains(x - 1, y) || !m.contains(x + 1, y) || !m.contains(x, y - 1) || !m.contains(x, y + 1);
}

inline std::string label_text(const PotholeRecord& rec, RelativeDepthMode mode, bool with_depth) {
  std::string s = "#" + std::to_string(rec.instance.id) + " A=" + format_fixed(rec.instance.contour_area, 1);
  if (with_depth) {
    const auto rpd = headline_rp_d(rec, mode);
    s += " RPD=" + (rpd ? format_fixed(*rpd, 2) + "%" : std::string("NA"));
  }
  return s;
}

}  // namespace overlay_detail

/// Deterministic rendering; pothole i uses palette color i mod 8 in report
/// order. Labels use only digits and "#ARPDN=.%-/ ".
inline Overlay render_overlay(const RasterImage& rgb, const std::optional<NormalizedDepth>& depth,
                              const FrameReport& report) {
  using namespace overlay_detail;
  if (rgb.channels() != 3) throw Error(ErrorCode::kInvalidArgument, "overlay needs an RGB image");
  const Size size = rgb.size();
  if (depth && depth->size() != size) {
    throw Error(ErrorCode::kDimensionMismatch, "depth and RGB differ in size");
  }
  for (const auto& rec : report.potholes) {
    if (rec.instance.mask.size() != size) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mask of pothole " + std::to_string(rec.instance.id) + " differs from RGB size");
    }
  }

  const int w = size.width, h = size.height;
  Overlay out;
  out.panels = depth ? 3 : 2;
  out.image = RasterImage(w * out.panels, h, 3);
  auto& img = out.image;

  // Base layers.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb px{rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2)};
      put(img, x, y, px);
      if (depth) {
        const Rgb dc = depth->valid(x, y) ? ramp(depth->value(x, y)) : Rgb{0, 0, 0};
        put(img, w + x, y, dc);
        auto blend = [](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>((a + b + 1) / 2); };
        put(img, 2 * w + x, y, {blend(px.r, dc.r), blend(px.g, dc.g), blend(px.b, dc.b)});
      }
    }
  }
  if (!depth) {
    // Second panel: filled masks on black.
    for (std::size_t i = 0; i < report.potholes.size(); ++i) {
      const auto& m = report.potholes[i].instance.mask;
      const Rgb c = kPalette[i % kPalette.size()];
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (m.at(x, y)) put(img, w + x, y, c);
        }
      }
    }
  }

  // Outlines on every panel.
  for (std::size_t i = 0; i < report.potholes.size(); ++i) {
    const auto& m = report.potholes[i].instance.mask;
    const Rgb c = kPalette[i % kPalette.size()];
    const int first = 0, last = depth ? out.panels : 1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!on_outline(m, x, y)) continue;
        for (int p = first; p < last; ++p) put(img, p * w + x, y, c);
      }
    }
  }

  // Labels on the RGB panel, above the box when there is room.
  for (std::size_t i = 0; i < report.potholes.size(); ++i) {
    const auto& rec = report.potholes[i];
    const std::string text = label_text(rec, report.rpd_mode, depth.has_value());
    const auto& b = rec.instance.bbox;
    int ly = b.y_min - kGlyphH - 2 >= 1 ? b.y_min - kGlyphH - 2 : b.y_max + 2;
    ly = std::clamp(ly, 1, std::max(1, h - kGlyphH - 1));
    const int lx = std::clamp(b.x_min, 1, std::max(1, w - text_width(text) - 1));
    draw_text(img, lx, ly, text, kPalette[i % kPalette.size()], 0, w);
    out.labels.push_back({rec.instance.id, text, lx, ly});
  }
  return out;
}

}  // namespace roadchar
