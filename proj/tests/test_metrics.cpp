#include <gtest/gtest.h>

#include "oracles.hpp"
#include "roadchar/metrics.hpp"

using namespace roadchar;

namespace {

const Size kFrame{100, 100};

GroundTruth gt_rect(double x0, double y0, double x1, double y1, std::string frame = "f", int cls = 0) {
  return GroundTruth(std::move(frame), cls, Polygon(oracle::rect(x0, y0, x1, y1)), kFrame);
}

Detection det_rect(double x0, double y0, double x1, double y1, double conf, std::string frame = "f", int cls = 0) {
  return Detection(std::move(frame), cls, Polygon(oracle::rect(x0, y0, x1, y1)), conf, kFrame);
}

}  // namespace

TEST(Iou, BoxBasics) {
  const BoxD a{0, 0, 10, 10};
  EXPECT_EQ(iou_box(a, a), 1.0);
  EXPECT_EQ(iou_box(a, {20, 20, 30, 30}), 0.0);
  EXPECT_DOUBLE_EQ(iou_box(a, {5, 0, 15, 10}), 1.0 / 3.0);
}

TEST(Iou, MaskStripOverlap) {
  BinaryMask a(30, 30), b(30, 30);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      a.set(x, y);
      b.set(x + 5, y);
    }
  EXPECT_DOUBLE_EQ(iou_mask(a, b), 50.0 / 150.0);
  EXPECT_EQ(iou_mask(BinaryMask(3, 3), BinaryMask(3, 3)), 0.0);
  EXPECT_THROW(iou_mask(a, BinaryMask(29, 30)), Error);
}

TEST(Iou, MatchesOracleOnRandomScenes) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto sc = oracle::random_scene(s);
    for (const auto& d : sc.dets) {
      for (const auto& g : sc.gts) {
        ASSERT_NEAR(iou(d, g, MatchKind::kBox), oracle::box_iou(d.box, g.box), 1e-12);
        ASSERT_EQ(iou(d, g, MatchKind::kMask), oracle::mask_iou(d.mask, g.mask));
      }
    }
  }
}

TEST(Match, PerfectSingle) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.4, 0.4)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.4, 0.4, 0.9)};
  const auto m = match(dets, gts, 0.5, MatchKind::kMask);
  EXPECT_EQ(m.true_positives.size(), 1u);
  EXPECT_TRUE(m.false_positives.empty());
  EXPECT_TRUE(m.false_negatives.empty());
}

TEST(Match, DuplicatePenalized) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.4, 0.4)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.4, 0.4, 0.6), det_rect(0.1, 0.1, 0.41, 0.4, 0.9)};
  const auto m = match(dets, gts, 0.5, MatchKind::kBox);
  ASSERT_EQ(m.true_positives.size(), 1u);
  EXPECT_EQ(m.true_positives[0].first, 1u);  // higher confidence wins
  ASSERT_EQ(m.false_positives.size(), 1u);
  EXPECT_EQ(m.false_positives[0], 0u);
}

TEST(Match, AgreesWithBruteForceGreedy) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto sc = oracle::random_scene(s);
    for (const auto kind : {MatchKind::kBox, MatchKind::kMask}) {
      for (const double tau : coco_iou_thresholds()) {
        const auto got = match(sc.dets, sc.gts, tau, kind);
        const auto want = oracle::brute_match(sc.dets, sc.gts, tau, kind);
        std::vector<bool> tp(sc.dets.size(), false);
        for (const auto& [d, g] : got.true_positives) tp[d] = true;
        ASSERT_EQ(tp, want.tp) << "seed " << s << " tau " << tau;
        ASSERT_EQ(got.true_positives.size() + got.false_negatives.size(), sc.gts.size());
        ASSERT_EQ(got.true_positives.size() + got.false_positives.size(), sc.dets.size());
      }
    }
  }
}

TEST(Prf, Arithmetic) {
  auto p = precision_recall_f1(2, 1, 0);
  EXPECT_NEAR(p.precision, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(p.recall, 1.0);
  EXPECT_NEAR(p.f1, 0.8, 1e-15);
  p = precision_recall_f1(0, 0, 0);
  EXPECT_EQ(p.precision, 0.0);
  EXPECT_EQ(p.recall, 0.0);
  EXPECT_EQ(p.f1, 0.0);
  EXPECT_DOUBLE_EQ(precision_recall_f1(1, 1, 1).f1, 0.5);
}

TEST(Ap, PerfectAndEmpty) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3), gt_rect(0.5, 0.5, 0.8, 0.8)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.9), det_rect(0.5, 0.5, 0.8, 0.8, 0.8),
                                    det_rect(0.0, 0.6, 0.1, 0.9, 0.1)};
  EXPECT_EQ(average_precision(dets, gts, 0.5, MatchKind::kMask), 1.0);
  EXPECT_EQ(average_precision({}, gts, 0.5, MatchKind::kMask), 0.0);
}

TEST(Ap, ConstructedFiveDetThreeGt) {
  // Ranking: TP, FP, TP, FP, TP. Envelope precision: 1 up to recall 1/3,
  // 2/3 up to 2/3, 3/5 up to 1.
  const std::vector<GroundTruth> gts{gt_rect(0.0, 0.0, 0.2, 0.2), gt_rect(0.4, 0.4, 0.6, 0.6),
                                     gt_rect(0.7, 0.0, 0.9, 0.2)};
  const std::vector<Detection> dets{
      det_rect(0.0, 0.0, 0.2, 0.2, 0.95), det_rect(0.3, 0.8, 0.5, 1.0, 0.9), det_rect(0.4, 0.4, 0.6, 0.6, 0.8),
      det_rect(0.0, 0.7, 0.1, 0.8, 0.7), det_rect(0.7, 0.0, 0.9, 0.2, 0.6)};
  // Recall levels 0..0.33 -> 34 points at 1; 0.34..0.66 -> 33 points at 2/3; 0.67..1 -> 34 points at 3/5.
  const double expected = (34 * 1.0 + 33 * (2.0 / 3.0) + 34 * 0.6) / 101.0;
  const double got = average_precision(dets, gts, 0.5, MatchKind::kBox);
  EXPECT_NEAR(got, expected, 1e-12);
  EXPECT_NEAR(got, oracle::brute_ap(oracle::brute_match(dets, gts, 0.5, MatchKind::kBox)), 1e-12);
}

TEST(Ap, AgreesWithBruteForceOnRandomScenes) {
  for (std::uint64_t s = 0; s < 150; ++s) {
    const auto sc = oracle::random_scene(s + 1000);
    for (const auto kind : {MatchKind::kBox, MatchKind::kMask}) {
      for (const double tau : coco_iou_thresholds()) {
        const double want = oracle::brute_ap(oracle::brute_match(sc.dets, sc.gts, tau, kind));
        ASSERT_NEAR(average_precision(sc.dets, sc.gts, tau, kind), want, 1e-9) << "seed " << s;
      }
    }
  }
}

TEST(Map, PerfectDetector) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3), gt_rect(0.5, 0.5, 0.8, 0.8)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.9), det_rect(0.5, 0.5, 0.8, 0.8, 0.8)};
  for (const auto kind : {MatchKind::kBox, MatchKind::kMask}) {
    const auto m = map_suite(dets, gts, kind);
    EXPECT_EQ(m.map50, 1.0);
    EXPECT_EQ(m.map50_95, 1.0);
  }
}

TEST(Map, SixtyPercentIou) {
  // 50 x 10 px gt; the detection covers 30 px of its width: IoU 0.6 exactly.
  const std::vector<GroundTruth> gts{gt_rect(0.10, 0.10, 0.60, 0.20)};
  const std::vector<Detection> dets{det_rect(0.10, 0.10, 0.40, 0.20, 0.9)};
  EXPECT_DOUBLE_EQ(iou(dets[0], gts[0], MatchKind::kMask), 0.6);
  const auto m = map_suite(dets, gts, MatchKind::kMask);
  EXPECT_EQ(m.map50, 1.0);
  EXPECT_NEAR(m.map50_95, 0.3, 1e-12);
}

TEST(Map, SingleClassEqualsAp) {
  const auto sc = oracle::random_scene(77);
  const auto m = map_suite(sc.dets, sc.gts, MatchKind::kMask);
  EXPECT_NEAR(m.map50, average_precision(sc.dets, sc.gts, 0.5, MatchKind::kMask), 1e-15);
}

TEST(Map, AveragesOverClasses) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3, "f", 0), gt_rect(0.5, 0.5, 0.8, 0.8, "f", 1)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.9, "f", 0)};
  const auto m = map_suite(dets, gts, MatchKind::kBox);
  EXPECT_NEAR(m.map50, 0.5, 1e-15);
}

TEST(Map, PoolsAcrossFrames) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3, "a"), gt_rect(0.1, 0.1, 0.3, 0.3, "b")};
  // The detection on frame b sits where a's gt is, but frames never mix.
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.9, "a"), det_rect(0.6, 0.6, 0.8, 0.8, 0.8, "b")};
  EXPECT_NEAR(average_precision(dets, gts, 0.5, MatchKind::kBox), 51.0 / 101.0, 1e-12);
}

TEST(Confusion, PerfectAndAllBelowThreshold) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3), gt_rect(0.5, 0.5, 0.8, 0.8)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.9), det_rect(0.5, 0.5, 0.8, 0.8, 0.8)};
  const auto perfect = confusion_matrix(dets, gts, 0.25, 0.5, MatchKind::kMask);
  EXPECT_EQ(perfect, (ConfusionMatrix{2, 0, 0, 0}));
  const auto none = confusion_matrix(dets, gts, 0.95, 0.5, MatchKind::kMask);
  EXPECT_EQ(none, (ConfusionMatrix{0, 0, 2, 0}));
}

TEST(Confusion, ReconcilesWithBruteForce) {
  for (std::uint64_t s = 0; s < 150; ++s) {
    const auto sc = oracle::random_scene(s + 5000);
    for (const double conf : {0.0, 0.25, 0.5, 0.75}) {
      // Oracle: match the detections at or above the cut.
      std::vector<Detection> kept;
      for (const auto& d : sc.dets)
        if (d.confidence >= conf) kept.push_back(d);
      const auto want = oracle::brute_match(kept, sc.gts, 0.5, MatchKind::kMask);
      const std::size_t tp = static_cast<std::size_t>(std::count(want.tp.begin(), want.tp.end(), true));
      const auto cm = confusion_matrix(sc.dets, sc.gts, conf, 0.5, MatchKind::kMask);
      ASSERT_EQ(cm.true_positive, tp);
      ASSERT_EQ(cm.true_positive + cm.false_negative, sc.gts.size());
      ASSERT_EQ(cm.true_positive + cm.false_positive, kept.size());
    }
  }
}

TEST(Curves, SamplesMatchPointwiseRecomputation) {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto sc = oracle::random_scene(s + 9000);
    const auto c = curves(sc.dets, sc.gts, MatchKind::kMask, 0.5);
    ASSERT_FALSE(c.confidence.empty());
    for (std::size_t i = 1; i < c.confidence.size(); ++i) {
      ASSERT_LT(c.confidence[i - 1].threshold, c.confidence[i].threshold);
      ASSERT_GE(c.confidence[i - 1].recall, c.confidence[i].recall);
    }
    for (const auto& sample : c.confidence) {
      std::vector<Detection> kept;
      for (const auto& d : sc.dets)
        if (d.confidence >= sample.threshold) kept.push_back(d);
      const auto m = oracle::brute_match(kept, sc.gts, 0.5, MatchKind::kMask);
      const auto tp = static_cast<std::size_t>(std::count(m.tp.begin(), m.tp.end(), true));
      const auto want = precision_recall_f1(tp, kept.size() - tp, sc.gts.size() - tp);
      ASSERT_NEAR(sample.precision, want.precision, 1e-12);
      ASSERT_NEAR(sample.recall, want.recall, 1e-12);
      ASSERT_NEAR(sample.f1, want.f1, 1e-12);
    }
  }
}

TEST(Curves, ThresholdExtremes) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.7)};
  const auto c = curves(dets, gts, MatchKind::kBox);
  EXPECT_EQ(c.confidence.front().threshold, 0.0);
  EXPECT_EQ(c.confidence.front().recall, 1.0);
  const auto& top = c.confidence.back();
  EXPECT_EQ(top.threshold, 1.0);
  EXPECT_EQ(top.precision, 0.0);
  EXPECT_EQ(top.recall, 0.0);
  EXPECT_EQ(top.f1, 0.0);
}

TEST(Evaluate, SummaryAtOperatingPoint) {
  const std::vector<GroundTruth> gts{gt_rect(0.1, 0.1, 0.3, 0.3), gt_rect(0.5, 0.5, 0.8, 0.8)};
  const std::vector<Detection> dets{det_rect(0.1, 0.1, 0.3, 0.3, 0.9), det_rect(0.5, 0.5, 0.8, 0.8, 0.2),
                                    det_rect(0.0, 0.8, 0.2, 1.0, 0.6)};
  const auto s = evaluate(dets, gts, 0.25, 0.5);
  EXPECT_EQ(s.gt_count, 2u);
  EXPECT_EQ(s.det_count, 3u);
  EXPECT_DOUBLE_EQ(s.box.mean.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.box.mean.recall, 0.5);
  EXPECT_EQ(s.box.confusion, (ConfusionMatrix{1, 1, 1, 0}));
  ASSERT_EQ(s.per_class.size(), 1u);
  EXPECT_EQ(s.per_class[0].class_id, 0);
}

TEST(Detection, ConfidenceValidated) {
  EXPECT_THROW(det_rect(0.1, 0.1, 0.2, 0.2, 1.2), Error);
}
