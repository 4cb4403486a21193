#pragma once

// Synthetic RGB/depth/mask scenes with brute-force expected values. The
// expected-value code below deliberately re-derives everything (masks,
// boundary walk, band, means) without calling the pipeline it is used to
// check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "roadchar/characterize.hpp"
#include "roadchar/dataset.hpp"
#include "roadchar/depth.hpp"
#include "roadchar/error.hpp"
#include "roadchar/geometry.hpp"
#include "roadchar/metrics.hpp"
#include "roadchar/random.hpp"
#include "roadchar/raster.hpp"

namespace roadchar::synth {

struct Ellipse {
  PointD center;  // pixels
  double semi_x = 10.0;
  double semi_y = 10.0;
  double depth_offset = 0.2;  // normalized, added to the plane inside
};

/// Pixel-coordinate polygon primitive for contour edge cases.
struct PolygonPrimitive {
  std::vector<PointD> vertices;
  double depth_offset = 0.2;
};

using Primitive = std::variant<Ellipse, PolygonPrimitive>;

struct SceneSpec {
  std::vector<Primitive> primitives;
  double plane_depth = 0.55;  // normalized
  double noise_sigma = 0.0;   // normalized units, applied after expected values
  double missing_speckle = 0.0;
  double depth_range_mm = kDefaultDepthRangeMm;
  int band_radius = 15;
  double min_valid_fraction = 0.2;
};

struct ExpectedPothole {
  std::size_t pixel_area = 0;
  double contour_area = 0.0;
  BBox bbox;
  std::size_t band_pixels = 0;
  bool depth_ok = false;  // both regions meet the coverage threshold
  double p_d = 0.0;
  double s_d = 0.0;
  std::size_t p_valid = 0;
  std::size_t s_valid = 0;
  BinaryMask mask;
  BinaryMask band;
};

struct SyntheticScene {
  SceneSpec spec;
  std::uint64_t seed = 0;
  std::string frame_id;
  FramePair pair;
  BinaryMask mask;
  std::vector<Polygon> ground_truth;  // one normalized polygon per primitive
  std::vector<ExpectedPothole> expected;  // ordered by (bbox.y_min, bbox.x_min)
  double expected_total_area = 0.0;
  double expected_damage_percent = 0.0;
};

namespace oracle {

inline bool in_ellipse(const Ellipse& e, int x, int y) {
  const double dx = (x + 0.5 - e.center.x) / e.semi_x;
  const double dy = (y + 0.5 - e.center.y) / e.semi_y;
  return dx * dx + dy * dy <= 1.0;
}

// Crossing-number test at a pixel center.
inline bool in_polygon(const std::vector<PointD>& v, int x, int y) {
  const double px = x + 0.5;
  const double py = y + 0.5;
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > py) != (v[j].y > py) &&
        px < (v[j].x - v[i].x) * (py - v[i].y) / (v[j].y - v[i].y) + v[i].x) {
      inside = !inside;
    }
  }
  return inside;
}

inline bool covers(const Primitive& prim, int x, int y) {
  if (const auto* e = std::get_if<Ellipse>(&prim)) return in_ellipse(*e, x, y);
  return in_polygon(std::get<PolygonPrimitive>(prim).vertices, x, y);
}

inline double offset_of(const Primitive& prim) {
  return std::visit([](const auto& p) { return p.depth_offset; }, prim);
}

/// Moore-neighbour boundary walk through pixel centers; returns the absolute
/// shoelace area of the visited loop. The walk stops when it is back at the
/// start pixel and about to repeat its first move (entry-direction stopping
/// fails on one-pixel spurs at the start). NaN if the walk never closes.
inline double boundary_walk_area(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  int sx = -1;
  int sy = -1;
  for (int i = 0; i < w * h; ++i) {
    if (m.bits()[static_cast<std::size_t>(i)]) {
      sx = i % w;
      sy = i / w;
      break;
    }
  }
  if (sx < 0) return 0.0;
  auto on = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && m.at(x, y); };
  // Clockwise ring starting north-west.
  const int ring[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}};
  auto ring_index = [&](int dx, int dy) {
    for (int k = 0; k < 8; ++k) {
      if (ring[k][0] == dx && ring[k][1] == dy) return k;
    }
    return 0;
  };
  // One Moore step from c with backtrack b; false if c is isolated.
  auto step = [&](int cx, int cy, int& bx, int& by, int& nx, int& ny) {
    const int k0 = ring_index(bx - cx, by - cy);
    for (int s = 1; s <= 8; ++s) {
      const int k = (k0 + s) % 8;
      const int tx = cx + ring[k][0];
      const int ty = cy + ring[k][1];
      if (on(tx, ty)) {
        nx = tx;
        ny = ty;
        return true;
      }
      bx = tx;
      by = ty;
    }
    return false;
  };

  // The start pixel is the first in raster order, so its west side is background.
  int bx = sx - 1;
  int by = sy;
  int first_x = 0;
  int first_y = 0;
  if (!step(sx, sy, bx, by, first_x, first_y)) return 0.0;

  std::vector<std::pair<int, int>> loop{{sx, sy}};
  int cx = first_x;
  int cy = first_y;
  bool closed = false;
  for (std::size_t guard = 0; guard < 8u * static_cast<std::size_t>(w) * h + 16; ++guard) {
    int nx = 0;
    int ny = 0;
    step(cx, cy, bx, by, nx, ny);
    if (cx == sx && cy == sy && nx == first_x && ny == first_y) {
      closed = true;
      break;
    }
    loop.emplace_back(cx, cy);
    cx = nx;
    cy = ny;
  }
  if (!closed) return std::numeric_limits<double>::quiet_NaN();

  double twice = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& a = loop[i];
    const auto& b = loop[(i + 1) % loop.size()];
    twice += (a.first + 0.5) * (b.second + 0.5) - (b.first + 0.5) * (a.second + 0.5);
  }
  return std::abs(twice) / 2.0;
}

/// Pixels within Euclidean `radius` of `m` by explicit disk dilation, minus
/// the `exclude` set.
inline BinaryMask disk_band(const BinaryMask& m, const BinaryMask& exclude, int radius) {
  const int w = m.width();
  const int h = m.height();
  BinaryMask band(w, h);
  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) continue;
      for (const auto& [dx, dy] : disk) {
        const int tx = x + dx;
        const int ty = y + dy;
        if (tx >= 0 && ty >= 0 && tx < w && ty < h && !exclude.at(tx, ty)) band.set(tx, ty);
      }
    }
  }
  return band;
}

/// True when the set pixels form exactly one 8-connected region.
inline bool is_single_component(const BinaryMask& m) {
  const int w = m.width();
  const int h = m.height();
  std::vector<char> seen(m.bits().size(), 0);
  std::vector<std::size_t> todo;
  std::size_t reached = 0;
  for (std::size_t i = 0; i < m.bits().size() && todo.empty(); ++i) {
    if (m.bits()[i]) {
      todo.push_back(i);
      seen[i] = 1;
    }
  }
  while (!todo.empty()) {
    const std::size_t i = todo.back();
    todo.pop_back();
    ++reached;
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int tx = x + dx;
        const int ty = y + dy;
        if (tx < 0 || ty < 0 || tx >= w || ty >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ty) * static_cast<std::size_t>(w) + static_cast<std::size_t>(tx);
        if (m.bits()[j] && !seen[j]) {
          seen[j] = 1;
          todo.push_back(j);
        }
      }
    }
  }
  return reached > 0 && reached == m.pixel_count();
}

struct Mean {
  double value = 0.0;
  std::size_t valid = 0;
  std::size_t total = 0;
};

// Mean of valid samples in `region`, summing deviations from the first valid
// sample so constant regions come out exact.
inline Mean region_mean(const BinaryMask& region, const DepthMap& depth, double range_mm) {
  Mean out;
  double anchor = 0.0;
  double dev = 0.0;
  for (std::size_t i = 0; i < region.bits().size(); ++i) {
    if (!region.bits()[i]) continue;
    ++out.total;
    const std::uint16_t mm = depth.samples()[i];
    if (mm == 0) continue;
    const double v = std::min(1.0, mm / range_mm);
    if (out.valid == 0) anchor = v;
    dev += v - anchor;
    ++out.valid;
  }
  if (out.valid) out.value = anchor + dev / static_cast<double>(out.valid);
  return out;
}

}  // namespace oracle

namespace detail {

inline std::vector<PointD> ellipse_outline(const Ellipse& e, Size frame, int vertices = 64) {
  std::vector<PointD> out;
  for (int i = 0; i < vertices; ++i) {
    const double t = 2.0 * std::numbers::pi * i / vertices;
    const double x = std::clamp((e.center.x + e.semi_x * std::cos(t)) / frame.width, 0.0, 1.0);
    const double y = std::clamp((e.center.y + e.semi_y * std::sin(t)) / frame.height, 0.0, 1.0);
    out.push_back({x, y});
  }
  return out;
}

inline std::uint16_t to_mm(double normalized, double range_mm) {
  return static_cast<std::uint16_t>(std::clamp(std::lround(normalized * range_mm), 1L, 65535L));
}

}  // namespace detail

/// Builds the scene and its expected values. Deterministic per (spec, seed).
inline SyntheticScene generate(const SceneSpec& spec, Size frame, std::uint64_t seed,
                               std::string frame_id = "synth") {
  roadchar::detail::require_positive(frame, "scene");
  SyntheticScene scene;
  scene.spec = spec;
  scene.seed = seed;
  scene.frame_id = frame_id;

  // Primitive masks, validated for bounds and mutual separation.
  std::vector<BinaryMask> masks;
  for (const auto& prim : spec.primitives) {
    if (const auto* e = std::get_if<Ellipse>(&prim)) {
      if (!(e->semi_x > 0 && e->semi_y > 0) || e->center.x - e->semi_x < 0 ||
          e->center.y - e->semi_y < 0 || e->center.x + e->semi_x > frame.width ||
          e->center.y + e->semi_y > frame.height) {
        throw Error(ErrorCode::kPrimitiveOutOfBounds, "ellipse exceeds the frame");
      }
      scene.ground_truth.emplace_back(detail::ellipse_outline(*e, frame));
    } else {
      const auto& v = std::get<PolygonPrimitive>(prim).vertices;
      if (v.size() < 3) throw Error(ErrorCode::kDegeneratePolygon, "polygon primitive needs 3 vertices");
      std::vector<PointD> norm;
      for (const auto& p : v) {
        if (p.x < 0 || p.y < 0 || p.x > frame.width || p.y > frame.height) {
          throw Error(ErrorCode::kPrimitiveOutOfBounds, "polygon vertex exceeds the frame");
        }
        norm.push_back({p.x / frame.width, p.y / frame.height});
      }
      scene.ground_truth.emplace_back(std::move(norm));
    }
    BinaryMask m(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y) {
      for (int x = 0; x < frame.width; ++x) {
        if (oracle::covers(prim, x, y)) m.set(x, y);
      }
    }
    if (!oracle::is_single_component(m)) {
      throw Error(ErrorCode::kInvalidArgument, "primitive must cover one connected set of pixel centers");
    }
    masks.push_back(std::move(m));
  }
  scene.mask = BinaryMask(frame.width, frame.height);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    // 8-adjacent primitives would merge into one component.
    const BinaryMask halo = oracle::disk_band(masks[i], BinaryMask(frame.width, frame.height), 1);
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t k = 0; k < halo.bits().size(); ++k) {
        if ((halo.bits()[k] || masks[i].bits()[k]) && masks[j].bits()[k]) {
          throw Error(ErrorCode::kInvalidArgument, "primitives touch or overlap");
        }
      }
    }
    scene.mask |= masks[i];
  }

  // Depth: plane everywhere, plane + offset inside each primitive.
  DepthMap depth(frame.width, frame.height, detail::to_mm(spec.plane_depth, spec.depth_range_mm));
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto mm = detail::to_mm(spec.plane_depth + oracle::offset_of(spec.primitives[i]), spec.depth_range_mm);
    for (std::size_t k = 0; k < masks[i].bits().size(); ++k) {
      if (masks[i].bits()[k]) depth.samples()[k] = mm;
    }
  }
  Rng rng(derive_seed(seed, frame_id));
  if (spec.missing_speckle > 0.0) {
    for (auto& s : depth.samples()) {
      if (rng.uniform() < spec.missing_speckle) s = DepthMap::kMissing;
    }
  }

  // Expected values, on the noiseless field.
  std::vector<std::size_t> order(masks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<ExpectedPothole> expected;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    ExpectedPothole e;
    e.mask = masks[i];
    e.pixel_area = masks[i].pixel_count();
    e.bbox = {frame.width, frame.height, -1, -1};
    for (int y = 0; y < frame.height; ++y) {
      for (int x = 0; x < frame.width; ++x) {
        if (!masks[i].at(x, y)) continue;
        e.bbox.x_min = std::min(e.bbox.x_min, x);
        e.bbox.y_min = std::min(e.bbox.y_min, y);
        e.bbox.x_max = std::max(e.bbox.x_max, x);
        e.bbox.y_max = std::max(e.bbox.y_max, y);
      }
    }
    e.contour_area = oracle::boundary_walk_area(masks[i]);
    e.band = oracle::disk_band(masks[i], scene.mask, spec.band_radius);
    e.band_pixels = e.band.pixel_count();
    const auto p = oracle::region_mean(masks[i], depth, spec.depth_range_mm);
    const auto s = oracle::region_mean(e.band, depth, spec.depth_range_mm);
    e.p_d = p.value;
    e.s_d = s.value;
    e.p_valid = p.valid;
    e.s_valid = s.valid;
    auto enough = [&](const oracle::Mean& m) {
      return m.valid > 0 && static_cast<double>(m.valid) / static_cast<double>(m.total) >= spec.min_valid_fraction;
    };
    e.depth_ok = enough(p) && enough(s);
    expected.push_back(std::move(e));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ba = expected[a].bbox;
    const auto& bb = expected[b].bbox;
    return ba.y_min != bb.y_min ? ba.y_min < bb.y_min : ba.x_min < bb.x_min;
  });
  for (const std::size_t i : order) {
    scene.expected_total_area += expected[i].contour_area;
    scene.expected.push_back(std::move(expected[i]));
  }
  scene.expected_damage_percent = 100.0 * scene.expected_total_area / static_cast<double>(frame.area());

  if (spec.noise_sigma > 0.0) {
    for (auto& s : depth.samples()) {
      if (s == DepthMap::kMissing) continue;
      const double v = s / spec.depth_range_mm + spec.noise_sigma * rng.normal();
      s = detail::to_mm(v, spec.depth_range_mm);
    }
  }

  // Flat gray road with a darker tint over potholes.
  RasterImage rgb(frame.width, frame.height, 3, 128);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!scene.mask.at(x, y)) continue;
      rgb.at(x, y, 0) = 92;
      rgb.at(x, y, 1) = 84;
      rgb.at(x, y, 2) = 76;
    }
  }
  scene.pair = FramePair::original(frame_id, std::move(rgb), std::move(depth));
  return scene;
}

struct RandomSceneOptions {
  int max_primitives = 4;
  double min_semi_axis = 3.0;
  double max_semi_axis = 24.0;
  double polygon_probability = 0.2;
  double noise_sigma = 0.0;
  double missing_speckle = 0.0;
};

/// Random non-touching primitives. Placement uses rejection sampling with a
/// 2 px gap between bounding boxes.
inline SceneSpec random_spec(Size frame, std::uint64_t seed, const RandomSceneOptions& opt = {}) {
  Rng rng(splitmix64(seed ^ 0x5eedULL));
  SceneSpec spec;
  spec.plane_depth = rng.uniform(0.3, 0.7);
  spec.noise_sigma = opt.noise_sigma;
  spec.missing_speckle = opt.missing_speckle;
  const int count = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_primitives) + 1));
  std::vector<BoxD> taken;
  for (int attempt = 0; attempt < 200 && static_cast<int>(spec.primitives.size()) < count; ++attempt) {
    const double max_a = std::min(opt.max_semi_axis, frame.width / 3.0);
    const double max_b = std::min(opt.max_semi_axis, frame.height / 3.0);
    const double a = rng.uniform(opt.min_semi_axis, max_a);
    const double b = rng.uniform(opt.min_semi_axis, max_b);
    const double cx = rng.uniform(a + 1.0, frame.width - a - 1.0);
    const double cy = rng.uniform(b + 1.0, frame.height - b - 1.0);
    const double offset = rng.uniform(0.05, 0.3);
    const BoxD box{cx - a - 2.0, cy - b - 2.0, cx + a + 2.0, cy + b + 2.0};
    const bool clash = std::any_of(taken.begin(), taken.end(), [&](const BoxD& t) {
      return box.x0 < t.x1 && t.x0 < box.x1 && box.y0 < t.y1 && t.y0 < box.y1;
    });
    const bool polygon = rng.coin(opt.polygon_probability);
    if (clash) continue;
    if (polygon) {
      // Triangle inscribed in the ellipse box; thin tips can split into
      // several pixel runs, so those are rejected.
      std::vector<PointD> v{{cx, cy - b}, {cx + a, cy + b}, {cx - a, cy + b * rng.uniform(0.2, 1.0)}};
      BinaryMask m(frame.width, frame.height);
      for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
          if (oracle::in_polygon(v, x, y)) m.set(x, y);
        }
      }
      if (!oracle::is_single_component(m)) continue;
      spec.primitives.emplace_back(PolygonPrimitive{std::move(v), offset});
    } else {
      spec.primitives.emplace_back(Ellipse{{cx, cy}, a, b, offset});
    }
    taken.push_back(box);
  }
  return spec;
}

/// Horizontally mirrored copy of a scene, including its expected values.
inline SyntheticScene mirror(const SyntheticScene& scene) {
  SyntheticScene out = scene;
  out.pair.rgb = ops::mirror_horizontal(scene.pair.rgb);
  out.pair.depth = ops::mirror_horizontal(scene.pair.depth);
  out.mask = roadchar::mirror_horizontal(scene.mask);
  const int w = scene.mask.width();
  out.ground_truth.clear();
  for (const auto& poly : scene.ground_truth) {
    std::vector<PointD> v;
    for (auto it = poly.vertices().rbegin(); it != poly.vertices().rend(); ++it) v.push_back({1.0 - it->x, it->y});
    out.ground_truth.emplace_back(std::move(v));
  }
  for (auto& e : out.expected) {
    e.mask = roadchar::mirror_horizontal(e.mask);
    e.band = roadchar::mirror_horizontal(e.band);
    e.bbox = {w - 1 - e.bbox.x_max, e.bbox.y_min, w - 1 - e.bbox.x_min, e.bbox.y_max};
  }
  std::stable_sort(out.expected.begin(), out.expected.end(), [](const auto& a, const auto& b) {
    return a.bbox.y_min != b.bbox.y_min ? a.bbox.y_min < b.bbox.y_min : a.bbox.x_min < b.bbox.x_min;
  });
  return out;
}

struct RoundTripReport {
  bool passed = true;
  std::vector<std::string> failures;
  std::size_t checks = 0;
  FrameReport report;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      passed = false;
      failures.push_back(what);
    }
  }
};

/// Runs instance extraction and characterization on the scene and compares
/// every recovered quantity with the scene's expected values.
inline RoundTripReport round_trip_check(const SyntheticScene& scene) {
  RoundTripReport rt;
  const auto& spec = scene.spec;
  const auto instances = extract_instances(scene.mask, Connectivity::kEight);
  const auto field = normalize_depth(scene.pair.depth, spec.depth_range_mm);
  CharacterizeConfig cfg;
  cfg.band_radius = spec.band_radius;
  cfg.min_valid_fraction = spec.min_valid_fraction;
  rt.report = frame_report(scene.frame_id, instances, static_cast<double>(scene.mask.size().area()), field, cfg);

  rt.expect(instances.size() == scene.expected.size(),
            "instance count " + std::to_string(instances.size()) + " != " + std::to_string(scene.expected.size()));
  if (instances.size() != scene.expected.size()) return rt;

  for (const auto& rec : rt.report.potholes) {
    const auto& inst = rec.instance;
    const auto& exp = scene.expected[static_cast<std::size_t>(inst.id)];
    const std::string tag = "pothole " + std::to_string(inst.id) + ": ";
    rt.expect(inst.pixel_area == exp.pixel_area, tag + "pixel_area");
    rt.expect(inst.mask == exp.mask, tag + "mask");
    rt.expect(inst.bbox == exp.bbox, tag + "bbox");
    rt.expect(std::abs(inst.contour_area - exp.contour_area) <= 1e-9, tag + "contour_area");
    rt.expect(inst.contour_area <= static_cast<double>(inst.pixel_area), tag + "contour_area <= pixel_area");
    rt.expect(rec.depth_stats.has_value() == exp.depth_ok, tag + "depth coverage verdict");
    if (!rec.depth_stats || !exp.depth_ok) continue;
    const auto& ds = *rec.depth_stats;
    rt.expect(ds.band_pixels == exp.band_pixels, tag + "band size");
    if (spec.noise_sigma == 0.0) {
      rt.expect(ds.p_d == exp.p_d, tag + "p_d exact");
      rt.expect(ds.s_d == exp.s_d, tag + "s_d exact");
    } else {
      const double q = 0.5 / spec.depth_range_mm / std::sqrt(3.0);  // mm rounding
      const double sigma = std::sqrt(spec.noise_sigma * spec.noise_sigma + q * q);
      rt.expect(std::abs(ds.p_d - exp.p_d) <= 3.0 * sigma / std::sqrt(double(exp.p_valid)), tag + "p_d within 3 sigma");
      rt.expect(std::abs(ds.s_d - exp.s_d) <= 3.0 * sigma / std::sqrt(double(exp.s_valid)), tag + "s_d within 3 sigma");
    }
    if (rec.rp_d_ratio && rec.rp_d_difference) {
      rt.expect(std::abs(*rec.rp_d_ratio - *rec.rp_d_difference / ds.s_d) <= 1e-9, tag + "ratio == difference / s_d");
    }
  }
  rt.expect(std::abs(rt.report.total_pothole_area - scene.expected_total_area) <= 1e-9, "total area");
  rt.expect(std::abs(rt.report.damage_percent - scene.expected_damage_percent) <= 1e-9, "damage percent");
  return rt;
}

}  // namespace roadchar::synth
