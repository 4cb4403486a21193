#pragma once

// YOLO-seg text lines: `class x1 y1 ... xn yn` for ground truth, with a
// trailing confidence for predictions. Coordinates are normalized to [0,1].

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roadchar/config.hpp"
#include "roadchar/error.hpp"
#include "roadchar/metrics.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

enum class AnnotationKind { kGroundTruth, kPrediction };

struct AnnotationLine {
  int class_id = 0;
  std::vector<PointD> coords;
  std::optional<double> confidence;

  friend bool operator==(const AnnotationLine&, const AnnotationLine&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_field(std::string_view field, std::size_t position) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::kMalformedLine, "field " + std::to_string(position) + " '" +
                std::string(field) + "' is not a decimal number", position);
  }
  return v;
}

}  // namespace detail

/// Strict parse. Errors carry the 1-based field position.
inline AnnotationLine parse_annotation(std::string_view line, AnnotationKind kind) {
  const auto fields = detail::split_fields(line);
  if (fields.empty()) throw Error(ErrorCode::kMalformedLine, "empty line", 1);

  AnnotationLine out;
  {
    const auto f = fields[0];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), out.class_id);
    if (ec != std::errc{} || ptr != f.data() + f.size() || out.class_id < 0) {
      throw Error(ErrorCode::kMalformedLine, "class id '" + std::string(f) + "' is not a non-negative integer", 1);
    }
  }
  const bool pred = kind == AnnotationKind::kPrediction;
  const std::size_t trailing = pred ? 1 : 0;
  const std::size_t n_coords = fields.size() >= 1 + trailing ? fields.size() - 1 - trailing : 0;
  if (n_coords % 2 != 0 || n_coords < 6) {
    const std::string expect = pred ? "an even number (>= 6) of coordinates followed by a confidence"
                                    : "an even number (>= 6) of coordinates";
    throw Error(ErrorCode::kMalformedLine,
                "expected " + expect + ", got " + std::to_string(fields.size() - 1) + " numeric fields",
                fields.size());
  }
  for (std::size_t i = 1; i + 1 <= n_coords; i += 2) {
    const double x = detail::parse_field(fields[i], i + 1);
    const double y = detail::parse_field(fields[i + 1], i + 2);
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error(ErrorCode::kOutOfRangeCoordinate, "field " + std::to_string(i + 1) + " outside [0,1]", i + 1);
    }
    if (!(y >= 0.0 && y <= 1.0)) {
      throw Error(ErrorCode::kOutOfRangeCoordinate, "field " + std::to_string(i + 2) + " outside [0,1]", i + 2);
    }
    out.coords.push_back({x, y});
  }
  if (pred) {
    const std::size_t pos = fields.size();
    const double c = detail::parse_field(fields.back(), pos);
    if (!(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorCode::kOutOfRangeCoordinate, "confidence outside [0,1]", pos);
    }
    out.confidence = c;
  }
  return out;
}

/// Shortest round-trip decimal text for every number.
inline std::string emit_annotation(const AnnotationLine& a) {
  std::string out = std::to_string(a.class_id);
  for (const auto& p : a.coords) {
    out += ' ';
    out += format_number(p.x);
    out += ' ';
    out += format_number(p.y);
  }
  if (a.confidence) {
    out += ' ';
    out += format_number(*a.confidence);
  }
  return out;
}

inline GroundTruth to_ground_truth(const AnnotationLine& a, std::string frame_id, Size frame) {
  return GroundTruth(std::move(frame_id), a.class_id, Polygon(a.coords), frame);
}

inline Detection to_detection(const AnnotationLine& a, std::string frame_id, Size frame) {
  if (!a.confidence) throw Error(ErrorCode::kInvalidArgument, "prediction line has no confidence");
  return Detection(std::move(frame_id), a.class_id, Polygon(a.coords), *a.confidence, frame);
}

/// All non-blank lines of a label or prediction file. Errors name the line.
inline std::vector<AnnotationLine> read_annotation_file(const std::filesystem::path& path,
                                                        AnnotationKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<AnnotationLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::split_fields(line).empty()) continue;
    try {
      out.push_back(parse_annotation(line, kind));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.detail(), e.position());
    }
  }
  return out;
}

inline void write_annotation_file(const std::filesystem::path& path, const std::vector<AnnotationLine>& lines) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& l : lines) out << emit_annotation(l) << '\n';
}

}  // namespace roadchar
