#pragma once

// JSON and CSV emission for frame reports, metrics summaries and depth
// evaluation results. JSON field order is fixed; every number is written at
// full precision and user-facing quantities also get a display-rounded twin.
// Parsing a report and emitting it again reproduces the same bytes.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "roadchar/characterize.hpp"
#include "roadchar/config.hpp"
#include "roadchar/depth_eval.hpp"
#include "roadchar/error.hpp"
#include "roadchar/metrics.hpp"

namespace roadchar {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct DisplayRules {
  int percent_decimals = 2;
  int depth_decimals = 4;
  int metric_decimals = 3;

  static DisplayRules from(const Config& c) { return {c.percent_decimals, c.depth_decimals, 3}; }
};

namespace detail {

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
inline Json optional_display(const std::optional<double>& v, int decimals) {
  return v ? Json(format_fixed(*v, decimals)) : Json(nullptr);
}
inline std::optional<double> read_optional(const Json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

template <typename F>
auto parse_guard(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "malformed " + what + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------- frame report

inline Json to_json(const FrameReport& r, const DisplayRules& d = {}) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "frame_report";
  j["frame_id"] = r.frame_id;
  j["frame_area"] = r.frame_area;
  j["rpd_mode"] = to_string(r.rpd_mode);
  j["rp_d_definitions"] = {{"difference", "(p_d - s_d) * 100"}, {"ratio", "(p_d - s_d) / s_d * 100"}};
  j["pothole_count"] = r.potholes.size();
  j["total_pothole_area"] = r.total_pothole_area;
  j["damage_percent"] = r.damage_percent;
  j["damage_percent_display"] = format_fixed(r.damage_percent, d.percent_decimals);
  Json potholes = Json::array();
  for (const auto& p : r.potholes) {
    const auto& inst = p.instance;
    Json e;
    e["id"] = inst.id;
    e["pixel_area"] = inst.pixel_area;
    e["contour_area"] = inst.contour_area;
    e["bbox"] = {inst.bbox.x_min, inst.bbox.y_min, inst.bbox.x_max, inst.bbox.y_max};
    e["centroid"] = {inst.centroid.x, inst.centroid.y};
    Json contour = Json::array();
    for (const auto& v : inst.contour) contour.push_back({v.x, v.y});
    e["contour"] = std::move(contour);
    if (p.depth_stats) {
      const auto& s = *p.depth_stats;
      e["depth"] = {{"p_d", s.p_d},
                    {"s_d", s.s_d},
                    {"p_d_display", format_fixed(s.p_d, d.depth_decimals)},
                    {"s_d_display", format_fixed(s.s_d, d.depth_decimals)},
                    {"valid_pothole_fraction", s.valid_pothole_fraction},
                    {"valid_band_fraction", s.valid_band_fraction},
                    {"pothole_pixels", s.pothole_pixels},
                    {"band_pixels", s.band_pixels}};
    } else {
      e["depth"] = nullptr;
    }
    e["rp_d"] = detail::optional_number(headline_rp_d(p, r.rpd_mode));
    e["rp_d_display"] = detail::optional_display(headline_rp_d(p, r.rpd_mode), d.percent_decimals);
    e["rp_d_difference"] = detail::optional_number(p.rp_d_difference);
    e["rp_d_difference_display"] = detail::optional_display(p.rp_d_difference, d.percent_decimals);
    e["rp_d_ratio"] = detail::optional_number(p.rp_d_ratio);
    e["rp_d_ratio_display"] = detail::optional_display(p.rp_d_ratio, d.percent_decimals);
    e["severity"] = p.severity;
    e["warning"] = p.warning;
    potholes.push_back(std::move(e));
  }
  j["potholes"] = std::move(potholes);
  return j;
}

inline FrameReport frame_report_from_json(const Json& j) {
  return detail::parse_guard("frame report", [&] {
    if (j.at("kind") != "frame_report") throw Error(ErrorCode::kInvalidArgument, "not a frame report");
    FrameReport r;
    r.frame_id = j.at("frame_id").get<std::string>();
    r.frame_area = j.at("frame_area").get<double>();
    r.rpd_mode = j.at("rpd_mode") == "ratio" ? RelativeDepthMode::kRatio : RelativeDepthMode::kDifference;
    r.total_pothole_area = j.at("total_pothole_area").get<double>();
    r.damage_percent = j.at("damage_percent").get<double>();
    for (const auto& e : j.at("potholes")) {
      PotholeRecord p;
      auto& inst = p.instance;
      inst.id = e.at("id").get<int>();
      inst.pixel_area = e.at("pixel_area").get<std::size_t>();
      inst.contour_area = e.at("contour_area").get<double>();
      const auto& b = e.at("bbox");
      inst.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
      inst.centroid = {e.at("centroid").at(0).get<double>(), e.at("centroid").at(1).get<double>()};
      for (const auto& v : e.at("contour")) inst.contour.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      if (const auto& dj = e.at("depth"); !dj.is_null()) {
        p.depth_stats = DepthStats{dj.at("p_d").get<double>(),
                                   dj.at("s_d").get<double>(),
                                   dj.at("valid_pothole_fraction").get<double>(),
                                   dj.at("valid_band_fraction").get<double>(),
                                   dj.at("pothole_pixels").get<std::size_t>(),
                                   dj.at("band_pixels").get<std::size_t>()};
      }
      p.rp_d_difference = detail::read_optional(e, "rp_d_difference");
      p.rp_d_ratio = detail::read_optional(e, "rp_d_ratio");
      p.severity = e.at("severity").get<double>();
      p.warning = e.at("warning").get<std::string>();
      r.potholes.push_back(std::move(p));
    }
    return r;
  });
}

inline std::string emit_report(const FrameReport& r, const DisplayRules& d = {}) {
  return to_json(r, d).dump(2) + "\n";
}

inline std::string frame_csv_header() {
  return "frame_id,id,pixel_area,contour_area,x_min,y_min,x_max,y_max,centroid_x,centroid_y,"
         "p_d,s_d,rp_d_difference,rp_d_ratio,severity,damage_percent\n";
}

/// One row per pothole; empty cells where depth is unavailable.
inline std::string frame_csv_rows(const FrameReport& r) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& p : r.potholes) {
    const auto& i = p.instance;
    out << r.frame_id << ',' << i.id << ',' << i.pixel_area << ',' << format_number(i.contour_area) << ','
        << i.bbox.x_min << ',' << i.bbox.y_min << ',' << i.bbox.x_max << ',' << i.bbox.y_max << ','
        << format_number(i.centroid.x) << ',' << format_number(i.centroid.y) << ','
        << (p.depth_stats ? format_number(p.depth_stats->p_d) : "") << ','
        << (p.depth_stats ? format_number(p.depth_stats->s_d) : "") << ','
        << opt(p.rp_d_difference) << ',' << opt(p.rp_d_ratio) << ',' << format_number(p.severity) << ','
        << format_number(r.damage_percent) << '\n';
  }
  return out.str();
}

// ------------------------------------------------------------ metrics summary

namespace detail {

inline Json scores_json(const KindScores& s, int decimals) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"ap50", s.ap50},
          {"ap50_95", s.ap50_95},
          {"display",
           {{"precision", format_fixed(s.precision, decimals)},
            {"recall", format_fixed(s.recall, decimals)},
            {"f1", format_fixed(s.f1, decimals)},
            {"ap50", format_fixed(s.ap50, decimals)},
            {"ap50_95", format_fixed(s.ap50_95, decimals)}}}};
}

inline KindScores scores_from_json(const Json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(),
          j.at("ap50").get<double>(), j.at("ap50_95").get<double>()};
}

inline Json kind_json(const KindReport& k, int decimals) {
  Json j;
  j["mean"] = scores_json(k.mean, decimals);
  j["map50"] = k.mean.ap50;
  j["map50_95"] = k.mean.ap50_95;
  const auto& c = k.confusion;
  j["confusion"] = {{"labels", {"pothole", "background"}},
                    {"layout", "rows = predicted, columns = true"},
                    {"true_positive", c.true_positive},
                    {"false_positive", c.false_positive},
                    {"false_negative", c.false_negative},
                    {"true_negative", c.true_negative},
                    {"matrix", {{c.true_positive, c.false_positive}, {c.false_negative, c.true_negative}}}};
  Json conf = Json::array();
  for (const auto& s : k.curves.confidence) {
    conf.push_back({{"threshold", s.threshold}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
  }
  Json pr = Json::array();
  for (const auto& p : k.curves.pr) {
    pr.push_back({{"recall", p.recall}, {"precision", p.precision}, {"confidence", p.confidence}});
  }
  j["curves"] = {{"confidence", std::move(conf)},
                 {"pr", std::move(pr)},
                 {"pr_interpolated", k.curves.pr_interpolated}};
  return j;
}

inline KindReport kind_from_json(const Json& j) {
  KindReport k;
  k.mean = scores_from_json(j.at("mean"));
  const auto& c = j.at("confusion");
  k.confusion = {c.at("true_positive").get<std::size_t>(), c.at("false_positive").get<std::size_t>(),
                 c.at("false_negative").get<std::size_t>(), c.at("true_negative").get<std::size_t>()};
  for (const auto& s : j.at("curves").at("confidence")) {
    k.curves.confidence.push_back({s.at("threshold").get<double>(), s.at("precision").get<double>(),
                                   s.at("recall").get<double>(), s.at("f1").get<double>()});
  }
  for (const auto& p : j.at("curves").at("pr")) {
    k.curves.pr.push_back({p.at("recall").get<double>(), p.at("precision").get<double>(),
                           p.at("confidence").get<double>()});
  }
  const auto& interp = j.at("curves").at("pr_interpolated");
  for (std::size_t i = 0; i < k.curves.pr_interpolated.size(); ++i) k.curves.pr_interpolated[i] = interp.at(i).get<double>();
  return k;
}

}  // namespace detail

inline Json to_json(const MetricsSummary& m, const DisplayRules& d = {}) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "metrics_summary";
  j["conf_threshold"] = m.conf_threshold;
  j["iou_threshold"] = m.iou_threshold;
  j["frame_count"] = m.frame_count;
  j["gt_count"] = m.gt_count;
  j["det_count"] = m.det_count;
  Json per_class = Json::array();
  for (const auto& c : m.per_class) {
    per_class.push_back({{"class_id", c.class_id},
                         {"box", detail::scores_json(c.box, d.metric_decimals)},
                         {"mask", detail::scores_json(c.mask, d.metric_decimals)}});
  }
  j["per_class"] = std::move(per_class);
  j["box"] = detail::kind_json(m.box, d.metric_decimals);
  j["mask"] = detail::kind_json(m.mask, d.metric_decimals);
  return j;
}

inline MetricsSummary metrics_summary_from_json(const Json& j) {
  return detail::parse_guard("metrics summary", [&] {
    if (j.at("kind") != "metrics_summary") throw Error(ErrorCode::kInvalidArgument, "not a metrics summary");
    MetricsSummary m;
    m.conf_threshold = j.at("conf_threshold").get<double>();
    m.iou_threshold = j.at("iou_threshold").get<double>();
    m.frame_count = j.at("frame_count").get<std::size_t>();
    m.gt_count = j.at("gt_count").get<std::size_t>();
    m.det_count = j.at("det_count").get<std::size_t>();
    for (const auto& c : j.at("per_class")) {
      m.per_class.push_back({c.at("class_id").get<int>(), detail::scores_from_json(c.at("box")),
                             detail::scores_from_json(c.at("mask"))});
    }
    m.box = detail::kind_from_json(j.at("box"));
    m.mask = detail::kind_from_json(j.at("mask"));
    return m;
  });
}

inline std::string emit_report(const MetricsSummary& m, const DisplayRules& d = {}) {
  return to_json(m, d).dump(2) + "\n";
}

/// Confidence sweep and PR samples for plotting.
inline std::string curves_csv(const MetricsSummary& m) {
  std::ostringstream out;
  out << "kind,series,x,precision,recall,f1\n";
  for (const auto* k : {&m.box, &m.mask}) {
    const char* name = k == &m.box ? "box" : "mask";
    for (const auto& s : k->curves.confidence) {
      out << name << ",confidence," << format_number(s.threshold) << ',' << format_number(s.precision) << ','
          << format_number(s.recall) << ',' << format_number(s.f1) << '\n';
    }
    for (std::size_t i = 0; i < k->curves.pr_interpolated.size(); ++i) {
      const double r = static_cast<double>(i) / 100.0;
      out << name << ",pr," << format_number(r) << ',' << format_number(k->curves.pr_interpolated[i]) << ','
          << format_number(r) << ",\n";
    }
  }
  return out.str();
}

// --------------------------------------------------------------- depth eval

inline Json to_json(const DepthEvalResult& r, const DisplayRules& d = {}) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "depth_eval";
  j["units"] = to_string(r.units);
  j["frame_count"] = r.frames.size();
  j["mean_rmse"] = r.mean_rmse;
  j["mean_rmse_display"] = format_fixed(r.mean_rmse, d.depth_decimals);
  Json frames = Json::array();
  for (const auto& f : r.frames) {
    frames.push_back({{"frame_id", f.frame_id}, {"rmse", f.rmse}, {"valid_pixels", f.valid_pixels}});
  }
  j["frames"] = std::move(frames);
  return j;
}

inline DepthEvalResult depth_eval_from_json(const Json& j) {
  return detail::parse_guard("depth evaluation", [&] {
    if (j.at("kind") != "depth_eval") throw Error(ErrorCode::kInvalidArgument, "not a depth evaluation");
    DepthEvalResult r;
    r.units = j.at("units") == "millimeters" ? DepthUnits::kMillimeters : DepthUnits::kNormalized;
    r.mean_rmse = j.at("mean_rmse").get<double>();
    for (const auto& f : j.at("frames")) {
      r.frames.push_back({f.at("frame_id").get<std::string>(), f.at("rmse").get<double>(),
                          f.at("valid_pixels").get<std::size_t>()});
    }
    return r;
  });
}

inline std::string emit_report(const DepthEvalResult& r, const DisplayRules& d = {}) {
  return to_json(r, d).dump(2) + "\n";
}

inline std::string depth_eval_csv(const DepthEvalResult& r) {
  std::ostringstream out;
  out << "frame_id,rmse,valid_pixels\n";
  for (const auto& f : r.frames) out << f.frame_id << ',' << format_number(f.rmse) << ',' << f.valid_pixels << '\n';
  return out.str();
}

inline Json parse_json_text(const std::string& text) {
  return detail::parse_guard("JSON", [&] { return Json::parse(text); });
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace roadchar
