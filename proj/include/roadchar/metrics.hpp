#pragma once

// Detection and segmentation evaluation: IoU, greedy confidence-ordered
// matching, precision/recall/F1, 101-point interpolated AP, mAP50 and
// mAP50-95, confusion counts and threshold sweeps.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roadchar/error.hpp"
#include "roadchar/geometry.hpp"
#include "roadchar/raster.hpp"

namespace roadchar {

enum class MatchKind { kBox, kMask };

inline const char* to_string(MatchKind kind) { return kind == MatchKind::kBox ? "box" : "mask"; }

/// Continuous axis-aligned box in pixel coordinates.
struct BoxD {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
  friend bool operator==(const BoxD&, const BoxD&) = default;
};

inline BoxD box_of(std::span<const PointD> pixels) {
  BoxD b{pixels[0].x, pixels[0].y, pixels[0].x, pixels[0].y};
  for (const auto& p : pixels) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

/// Polygon-backed annotation with its derived box and mask for one frame size.
struct Annotated {
  std::string frame_id;
  int class_id = 0;
  Polygon polygon;
  Size frame;
  BoxD box;
  BinaryMask mask;

  Annotated() = default;
  Annotated(std::string id, int cls, Polygon poly, Size frame_size)
      : frame_id(std::move(id)), class_id(cls), polygon(std::move(poly)), frame(frame_size) {
    const auto pixels = polygon.to_pixels(frame);
    box = box_of(pixels);
    mask = rasterize_pixels(pixels, frame);
  }
};

struct GroundTruth : Annotated {
  using Annotated::Annotated;
};

struct Detection : Annotated {
  double confidence = 0.0;

  Detection() = default;
  Detection(std::string frame, int cls, Polygon poly, double conf, Size frame_size)
      : Annotated(std::move(frame), cls, std::move(poly), frame_size), confidence(conf) {
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw Error(ErrorCode::kOutOfRangeCoordinate, "confidence outside [0,1]");
    }
  }
};

inline double iou_box(const BoxD& a, const BoxD& b) {
  const BoxD inter{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
                   std::min(a.y1, b.y1)};
  const double i = (inter.x1 > inter.x0 && inter.y1 > inter.y0) ? inter.area() : 0.0;
  const double u = a.area() + b.area() - i;
  return u > 0.0 ? i / u : 0.0;
}

inline double iou_mask(const BinaryMask& a, const BinaryMask& b) {
  a.require_same_size(b);
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& ab = a.bits();
  const auto& bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += static_cast<std::size_t>(ab[i] & bb[i]);
    uni += static_cast<std::size_t>(ab[i] | bb[i]);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double iou(const Annotated& a, const Annotated& b, MatchKind kind) {
  return kind == MatchKind::kBox ? iou_box(a.box, b.box) : iou_mask(a.mask, b.mask);
}

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> true_positives;  // (det, gt)
  std::vector<std::size_t> false_positives;                         // det indices
  std::vector<std::size_t> false_negatives;                         // gt indices
};

/// Detection indices ordered by confidence descending, index ascending.
inline std::vector<std::size_t> confidence_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });
  return order;
}

/// IoU table for one frame and class; matching at several thresholds reuses it.
class IouTable {
 public:
  IouTable(std::span<const Detection> dets, std::span<const GroundTruth> gts, MatchKind kind)
      : n_gts_(gts.size()), order_(confidence_order(dets)), values_(dets.size() * gts.size()) {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      for (std::size_t g = 0; g < gts.size(); ++g) values_[d * n_gts_ + g] = iou(dets[d], gts[g], kind);
    }
  }

  double at(std::size_t det, std::size_t gt) const { return values_[det * n_gts_ + gt]; }

  /// Greedy assignment: each detection, in confidence order, takes the
  /// unmatched ground truth of highest IoU >= threshold (lowest index on ties).
  /// Returns the matched gt per detection, or -1.
  std::vector<long> assign(double threshold) const {
    std::vector<long> det_to_gt(order_.size(), -1);
    std::vector<char> taken(n_gts_, 0);
    for (const std::size_t d : order_) {
      long best = -1;
      double best_iou = threshold;
      for (std::size_t g = 0; g < n_gts_; ++g) {
        if (taken[g]) continue;
        const double v = at(d, g);
        if (v >= best_iou && (best < 0 || v > best_iou)) {
          best = static_cast<long>(g);
          best_iou = v;
        }
      }
      if (best >= 0) {
        taken[static_cast<std::size_t>(best)] = 1;
        det_to_gt[d] = best;
      }
    }
    return det_to_gt;
  }

 private:
  std::size_t n_gts_;
  std::vector<std::size_t> order_;
  std::vector<double> values_;
};

/// Single frame, single class.
inline MatchResult match(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_threshold, MatchKind kind) {
  const IouTable table(dets, gts, kind);
  const auto det_to_gt = table.assign(iou_threshold);
  MatchResult out;
  std::vector<char> gt_hit(gts.size(), 0);
  for (const std::size_t d : confidence_order(dets)) {
    if (det_to_gt[d] >= 0) {
      out.true_positives.emplace_back(d, static_cast<std::size_t>(det_to_gt[d]));
      gt_hit[static_cast<std::size_t>(det_to_gt[d])] = 1;
    } else {
      out.false_positives.push_back(d);
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!gt_hit[g]) out.false_negatives.push_back(g);
  }
  return out;
}

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 0/0 cases are reported as 0.
inline PrecisionRecallF1 precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrecisionRecallF1 out;
  if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

/// IoU thresholds 0.50, 0.55, ..., 0.95 (computed as hundredths so that
/// 0.60 is the correctly rounded double).
inline std::array<double, 10> coco_iou_thresholds() {
  std::array<double, 10> out{};
  for (int i = 0; i < 10; ++i) out[i] = static_cast<double>(50 + 5 * i) / 100.0;
  return out;
}

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double confidence = 0.0;
};

/// Detections pooled over frames, each flagged TP/FP at one IoU threshold,
/// ranked by confidence.
struct RankedDetections {
  std::vector<double> confidence;
  std::vector<char> is_tp;
  std::size_t gt_count = 0;

  /// Cumulative precision/recall after each ranked detection.
  std::vector<PrPoint> pr_points() const {
    std::vector<PrPoint> out;
    out.reserve(confidence.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < confidence.size(); ++i) {
      tp += is_tp[i] ? 1 : 0;
      const double recall =
          gt_count == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gt_count);
      out.push_back({recall, static_cast<double>(tp) / static_cast<double>(i + 1), confidence[i]});
    }
    return out;
  }
};

namespace detail {

struct FrameClassGroup {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};

using GroupKey = std::pair<std::string, int>;

inline std::map<GroupKey, FrameClassGroup> group_by_frame_class(std::span<const Detection> dets,
                                                                std::span<const GroundTruth> gts) {
  std::map<GroupKey, FrameClassGroup> groups;
  for (const auto& d : dets) groups[{d.frame_id, d.class_id}].dets.push_back(d);
  for (const auto& g : gts) groups[{g.frame_id, g.class_id}].gts.push_back(g);
  return groups;
}

}  // namespace detail

/// Precomputed IoU tables for a whole evaluation set; every metric at any
/// threshold is derived from these.
class Evaluation {
 public:
  Evaluation(std::span<const Detection> dets, std::span<const GroundTruth> gts, MatchKind kind)
      : kind_(kind) {
    for (auto& [key, group] : detail::group_by_frame_class(dets, gts)) {
      Entry e{key.second, std::move(group.dets), group.gts.size(), {}};
      e.table.emplace(IouTable(e.dets, group.gts, kind));
      entries_.push_back(std::move(e));
      classes_.insert(key.second);
    }
  }

  MatchKind kind() const { return kind_; }

  /// Classes that have at least one detection or ground truth.
  const std::set<int>& classes() const { return classes_; }

  std::size_t gt_count(int class_id) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.class_id == class_id ? e.gt_count : 0;
    return n;
  }

  RankedDetections ranked(int class_id, double iou_threshold) const {
    struct Item {
      double confidence;
      char tp;
    };
    std::vector<Item> items;
    RankedDetections out;
    for (const auto& e : entries_) {
      if (e.class_id != class_id) continue;
      out.gt_count += e.gt_count;
      const auto det_to_gt = e.table->assign(iou_threshold);
      for (std::size_t d = 0; d < e.dets.size(); ++d) {
        items.push_back({e.dets[d].confidence, static_cast<char>(det_to_gt[d] >= 0)});
      }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.confidence > b.confidence; });
    for (const auto& it : items) {
      out.confidence.push_back(it.confidence);
      out.is_tp.push_back(it.tp);
    }
    return out;
  }

  /// Counts at a confidence cut and IoU threshold, pooled over classes.
  std::array<std::size_t, 3> counts(double conf_threshold, double iou_threshold,
                                    std::optional<int> class_id = std::nullopt) const {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t gts = 0;
    for (const auto& e : entries_) {
      if (class_id && e.class_id != *class_id) continue;
      gts += e.gt_count;
      const auto det_to_gt = e.table->assign(iou_threshold);
      for (std::size_t d = 0; d < e.dets.size(); ++d) {
        if (e.dets[d].confidence < conf_threshold) continue;
        (det_to_gt[d] >= 0 ? tp : fp) += 1;
      }
    }
    return {tp, fp, gts - tp};
  }

 private:
  struct Entry {
    int class_id;
    std::vector<Detection> dets;
    std::size_t gt_count;
    std::optional<IouTable> table;
  };

  MatchKind kind_;
  std::vector<Entry> entries_;
  std::set<int> classes_;
};

/// 101-point interpolated AP over ranked detections: mean over recall levels
/// 0.00..1.00 of the highest precision achieved at recall >= that level.
inline double ap_101(const RankedDetections& ranked) {
  if (ranked.gt_count == 0 || ranked.confidence.empty()) return 0.0;
  auto points = ranked.pr_points();
  for (std::size_t i = points.size() - 1; i-- > 0;) {
    points[i].precision = std::max(points[i].precision, points[i + 1].precision);
  }
  double sum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k <= 100; ++k) {
    const double level = static_cast<double>(k) / 100.0;
    while (i < points.size() && points[i].recall < level) ++i;
    if (i == points.size()) break;
    sum += points[i].precision;
  }
  return sum / 101.0;
}

/// All detections and ground truths are treated as one class.
inline double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                double iou_threshold, MatchKind kind) {
  std::vector<Detection> d(dets.begin(), dets.end());
  std::vector<GroundTruth> g(gts.begin(), gts.end());
  for (auto& x : d) x.class_id = 0;
  for (auto& x : g) x.class_id = 0;
  return ap_101(Evaluation(d, g, kind).ranked(0, iou_threshold));
}

struct MapScores {
  double map50 = 0.0;
  double map50_95 = 0.0;
};

/// AP per class at each COCO threshold; classes without ground truth are skipped.
inline std::map<int, std::array<double, 10>> ap_table(const Evaluation& eval) {
  std::map<int, std::array<double, 10>> out;
  const auto taus = coco_iou_thresholds();
  for (const int cls : eval.classes()) {
    if (eval.gt_count(cls) == 0) continue;
    auto& row = out[cls];
    for (std::size_t t = 0; t < taus.size(); ++t) row[t] = ap_101(eval.ranked(cls, taus[t]));
  }
  return out;
}

inline MapScores map_from_table(const std::map<int, std::array<double, 10>>& table) {
  MapScores out;
  if (table.empty()) return out;
  for (const auto& [cls, row] : table) {
    out.map50 += row[0];
    out.map50_95 += std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
  }
  out.map50 /= static_cast<double>(table.size());
  out.map50_95 /= static_cast<double>(table.size());
  return out;
}

inline MapScores map_suite(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                           MatchKind kind) {
  return map_from_table(ap_table(Evaluation(dets, gts, kind)));
}

/// Pothole/background confusion counts. The background/background cell is
/// undefined for detection and stays 0.
struct ConfusionMatrix {
  std::size_t true_positive = 0;   // (pred pothole, true pothole)
  std::size_t false_positive = 0;  // (pred pothole, true background)
  std::size_t false_negative = 0;  // (pred background, true pothole)
  std::size_t true_negative = 0;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(const Evaluation& eval, double conf_threshold,
                                        double iou_threshold) {
  const auto [tp, fp, fn] = eval.counts(conf_threshold, iou_threshold);
  return {tp, fp, fn, 0};
}

inline ConfusionMatrix confusion_matrix(std::span<const Detection> dets,
                                        std::span<const GroundTruth> gts, double conf_threshold,
                                        double iou_threshold, MatchKind kind) {
  return confusion_matrix(Evaluation(dets, gts, kind), conf_threshold, iou_threshold);
}

struct ConfidenceSample {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Curves {
  std::vector<ConfidenceSample> confidence;  // ascending threshold
  std::vector<PrPoint> pr;                   // ranked cumulative points
  std::array<double, 101> pr_interpolated{}; // envelope precision at recall k/100
};

/// Threshold sweep over {0, 1} and every distinct confidence. A detection is
/// kept when its confidence >= threshold. Greedy matching in confidence order
/// means raising the threshold only drops a suffix of each frame's ranking, so
/// TP flags at the lowest threshold stay valid for every cut.
inline Curves curves(const Evaluation& eval, double iou_threshold) {
  Curves out;
  std::vector<RankedDetections> per_class;
  std::set<double> thresholds{0.0, 1.0};
  for (const int cls : eval.classes()) {
    per_class.push_back(eval.ranked(cls, iou_threshold));
    thresholds.insert(per_class.back().confidence.begin(), per_class.back().confidence.end());
  }

  // Pooled ranking for the PR curve.
  RankedDetections pooled;
  {
    std::vector<std::pair<double, char>> items;
    for (const auto& r : per_class) {
      pooled.gt_count += r.gt_count;
      for (std::size_t i = 0; i < r.confidence.size(); ++i) items.emplace_back(r.confidence[i], r.is_tp[i]);
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [c, tp] : items) {
      pooled.confidence.push_back(c);
      pooled.is_tp.push_back(tp);
    }
  }

  for (const double t : thresholds) {
    std::size_t tp = 0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < pooled.confidence.size() && pooled.confidence[i] >= t; ++i) {
      ++kept;
      tp += pooled.is_tp[i] ? 1 : 0;
    }
    const auto prf = precision_recall_f1(tp, kept - tp, pooled.gt_count - tp);
    out.confidence.push_back({t, prf.precision, prf.recall, prf.f1});
  }

  out.pr = pooled.pr_points();
  auto env = out.pr;
  for (std::size_t i = env.size(); i-- > 1;) env[i - 1].precision = std::max(env[i - 1].precision, env[i].precision);
  std::size_t i = 0;
  for (int k = 0; k <= 100; ++k) {
    const double level = static_cast<double>(k) / 100.0;
    while (i < env.size() && env[i].recall < level) ++i;
    out.pr_interpolated[static_cast<std::size_t>(k)] = i < env.size() ? env[i].precision : 0.0;
  }
  return out;
}

inline Curves curves(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                     MatchKind kind, double iou_threshold = 0.5) {
  return curves(Evaluation(dets, gts, kind), iou_threshold);
}

struct KindScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap50 = 0.0;
  double ap50_95 = 0.0;
};

struct ClassScores {
  int class_id = 0;
  KindScores box;
  KindScores mask;
};

struct KindReport {
  KindScores mean;
  ConfusionMatrix confusion;
  Curves curves;
};

struct MetricsSummary {
  double conf_threshold = 0.25;
  double iou_threshold = 0.50;
  std::size_t frame_count = 0;
  std::size_t gt_count = 0;
  std::size_t det_count = 0;
  std::vector<ClassScores> per_class;
  KindReport box;
  KindReport mask;
};

/// Full evaluation. P/R/F1 are taken at (conf_threshold, iou_threshold);
/// AP values use every detection regardless of confidence.
inline MetricsSummary evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                               double conf_threshold = 0.25, double iou_threshold = 0.50) {
  MetricsSummary out;
  out.conf_threshold = conf_threshold;
  out.iou_threshold = iou_threshold;
  out.gt_count = gts.size();
  out.det_count = dets.size();
  std::set<std::string> frames;
  for (const auto& d : dets) frames.insert(d.frame_id);
  for (const auto& g : gts) frames.insert(g.frame_id);
  out.frame_count = frames.size();

  std::map<int, ClassScores> per_class;
  for (const MatchKind kind : {MatchKind::kBox, MatchKind::kMask}) {
    const Evaluation eval(dets, gts, kind);
    KindReport& report = kind == MatchKind::kBox ? out.box : out.mask;
    const auto table = ap_table(eval);
    for (const auto& [cls, row] : table) {
      KindScores& s = kind == MatchKind::kBox ? per_class[cls].box : per_class[cls].mask;
      per_class[cls].class_id = cls;
      const auto [tp, fp, fn] = eval.counts(conf_threshold, iou_threshold, cls);
      const auto prf = precision_recall_f1(tp, fp, fn);
      s.precision = prf.precision;
      s.recall = prf.recall;
      s.f1 = prf.f1;
      s.ap50 = row[0];
      s.ap50_95 = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    }
    if (!table.empty()) {
      for (const auto& [cls, row] : table) {
        const KindScores& s = kind == MatchKind::kBox ? per_class[cls].box : per_class[cls].mask;
        report.mean.precision += s.precision;
        report.mean.recall += s.recall;
        report.mean.f1 += s.f1;
      }
      const double k = static_cast<double>(table.size());
      report.mean.precision /= k;
      report.mean.recall /= k;
      report.mean.f1 /= k;
      const auto maps = map_from_table(table);
      report.mean.ap50 = maps.map50;
      report.mean.ap50_95 = maps.map50_95;
    }
    report.confusion = confusion_matrix(eval, conf_threshold, iou_threshold);
    report.curves = curves(eval, iou_threshold);
  }
  for (auto& [cls, s] : per_class) out.per_class.push_back(s);
  return out;
}

}  // namespace roadchar
