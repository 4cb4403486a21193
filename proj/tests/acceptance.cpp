// One line per acceptance criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "roadchar/annotation.hpp"
#include "roadchar/characterize.hpp"
#include "roadchar/dataset.hpp"
#include "roadchar/depth_eval.hpp"
#include "roadchar/png_io.hpp"
#include "roadchar/report.hpp"
#include "roadchar/synth.hpp"

using namespace roadchar;

namespace {

struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

int failures = 0;

void criterion(int n, const char* title, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(s < budget_s, "over time budget");
  failures += !c.failure.empty();
  std::printf("[%s] %d. %s (%.2fs)%s%s\n", c.failure.empty() ? "PASS" : "FAIL", n, title, s,
              c.failure.empty() ? "" : ": ", c.failure.c_str());
}

FrameReport areas_report(std::initializer_list<double> areas) {
  std::vector<PotholeRecord> recs;
  int id = 0;
  for (const double a : areas) {
    Instance i;
    i.id = id++;
    i.contour_area = a;
    recs.push_back(PotholeRecord{i, {}, {}, {}, 0.0, {}});
  }
  return summarize_frame("row", 245760.0, std::move(recs));
}

void damage_rows(Check& c) {
  const std::initializer_list<double> rows[] = {{12101.0}, {1723.5, 3778.0}, {2497.0, 1113.5, 43.0}, {5929.0}, {8923.0}};
  const char* want[] = {"4.92", "2.24", "1.49", "2.41", "3.63"};
  for (int i = 0; i < 5; ++i) {
    const auto got = format_fixed(areas_report(rows[i]).damage_percent, 2);
    c.expect(got == want[i], "row " + std::to_string(i) + " gave " + got);
  }
  const auto j = emit_report(areas_report({12101.0}));
  c.expect(j.find("\"total_pothole_area\": 12101.0") != std::string::npos, "JSON total area");
  c.expect(j.find("\"damage_percent_display\": \"4.92\"") != std::string::npos, "JSON damage display");
}

void relative_depths(Check& c) {
  const double pairs[3][2] = {{0.7693, 0.5808}, {0.6925, 0.5254}, {0.6046, 0.5200}};
  const char* diff[] = {"18.85", "16.71", "8.46"};
  const char* ratio[] = {"32.46", "31.80", "16.27"};
  for (int i = 0; i < 3; ++i) {
    const double p = pairs[i][0], s = pairs[i][1];
    c.expect(format_fixed(relative_depth(p, s), 2) == diff[i], std::string("difference ") + diff[i]);
    c.expect(format_fixed(relative_depth(p, s, RelativeDepthMode::kRatio), 2) == ratio[i],
             std::string("ratio ") + ratio[i]);

    // A disk at depth p on a plane at s, through the full report path.
    BinaryMask mask(96, 96);
    NormalizedDepth depth(96, 96, s);
    for (int y = 0; y < 96; ++y)
      for (int x = 0; x < 96; ++x)
        if ((x - 48) * (x - 48) + (y - 48) * (y - 48) <= 144) {
          mask.set(x, y);
          depth.set(x, y, p);
        }
    const auto report = frame_report("f", extract_instances(mask), 96.0 * 96.0, depth);
    const auto j = parse_json_text(emit_report(report)).at("potholes").at(0);
    c.expect(j.at("rp_d_difference_display") == diff[i], "report difference display");
    c.expect(j.at("rp_d_ratio_display") == ratio[i], "report ratio display");
  }
}

void synthetic_scenes(Check& c) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Size frame{160, 120};
    const auto scene = synth::generate(synth::random_spec(frame, seed), frame, seed);
    const auto rt = synth::round_trip_check(scene);
    c.expect(rt.passed, "seed " + std::to_string(seed) + ": " + (rt.failures.empty() ? "" : rt.failures[0]));
    // The round trip compares contour areas to the traced-boundary oracle;
    // restate the pixel-area and ratio identities here as well.
    for (std::size_t i = 0; i < rt.report.potholes.size(); ++i) {
      const auto& rec = rt.report.potholes[i];
      bool found = false;
      for (const auto& e : scene.expected) {
        if (e.mask.bits() == rec.instance.mask.bits()) found = e.pixel_area == rec.instance.pixel_area;
      }
      c.expect(found, "pixel area");
      if (rec.rp_d_ratio && rec.rp_d_difference) {
        c.expect(std::abs(*rec.rp_d_ratio - *rec.rp_d_difference / rec.depth_stats->s_d) <= 1e-9, "mode identity");
      }
    }
  }
}

void metrics_oracle(Check& c) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto sc = oracle::random_scene(seed + 5000);
    for (const auto kind : {MatchKind::kBox, MatchKind::kMask}) {
      for (const double tau : coco_iou_thresholds()) {
        const double want = oracle::brute_ap(oracle::brute_match(sc.dets, sc.gts, tau, kind));
        const double got = average_precision(sc.dets, sc.gts, tau, kind);
        c.expect(std::abs(got - want) <= 1e-9, "AP seed " + std::to_string(seed));
      }
      for (const double conf : {0.0, 0.25, 0.5, 0.8}) {
        const auto cm = confusion_matrix(sc.dets, sc.gts, conf, 0.5, kind);
        std::size_t kept = 0;
        for (const auto& d : sc.dets) kept += d.confidence >= conf;
        c.expect(cm.true_positive + cm.false_negative == sc.gts.size(), "TP+FN == |gts|");
        c.expect(cm.true_positive + cm.false_positive == kept, "TP+FP == |dets>=threshold|");
      }
    }
  }
}

NormalizedDepth random_field(int w, int h, std::uint64_t seed, double missing) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NormalizedDepth d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (u(gen) < missing) d.set_missing(x, y);
      else d.set(x, y, u(gen));
    }
  return d;
}

void depth_eval_properties(Check& c) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_field(31, 23, seed, 0.3);
    c.expect(rmse(g, g) == 0.0, "rmse(x, x)");
    const double off = 0.01 * static_cast<double>(seed + 1);
    NormalizedDepth shifted = g, perturbed = g;
    for (int y = 0; y < 23; ++y)
      for (int x = 0; x < 31; ++x) {
        shifted.set(x, y, g.value(x, y) + off);
        if (!g.valid(x, y)) perturbed.set(x, y, u(gen));
      }
    c.expect(std::abs(rmse(shifted, g) - off) <= 1e-12, "constant offset");
    c.expect(rmse(perturbed, g) == rmse(g, g), "missing-pixel invariance");
  }
  NormalizedDepth gt(2, 2), pred(2, 2);
  gt.set(0, 0, 0.1);
  gt.set(1, 0, 0.2);
  gt.set(0, 1, 0.3);
  gt.set_missing(1, 1);
  pred.set(0, 0, 0.2);
  pred.set(1, 0, 0.2);
  pred.set(0, 1, 0.5);
  pred.set(1, 1, 0.9);
  c.expect(std::abs(rmse(pred, gt) - 0.1291) <= 1e-4, "2x2 case");
}

std::vector<FramePair> raw_pairs(int n) {
  std::mt19937_64 gen(21);
  std::vector<FramePair> out;
  for (int i = 0; i < n; ++i) {
    RasterImage rgb(20, 14, 3);
    for (auto& s : rgb.samples()) s = static_cast<std::uint8_t>(gen() % 256);
    DepthMap d(20, 14);
    for (auto& s : d.samples()) s = gen() % 5 == 0 ? 0 : static_cast<std::uint16_t>(300 + gen() % 4000);
    out.push_back(FramePair::original("frame" + std::to_string(i), std::move(rgb), std::move(d)));
  }
  return out;
}

void dataset_prep(Check& c) {
  const auto pairs = raw_pairs(12);
  const auto dir = oracle::fresh_dir("acceptance_prep");
  auto encoded = [&](const std::string& tag) {
    std::string bytes;
    for (const auto& p : pairs) {
      for (const auto& v : augment(p, 7)) {
        png::write_image(dir / tag / (v.source_id + "_rgb.png"), v.rgb);
        png::write_depth(dir / tag / (v.source_id + "_d.png"), v.depth);
        bytes += read_text(dir / tag / (v.source_id + "_rgb.png"));
        bytes += read_text(dir / tag / (v.source_id + "_d.png"));
      }
    }
    return bytes;
  };
  c.expect(encoded("a") == encoded("b"), "augmented bytes differ across runs");

  for (const auto& p : pairs) {
    const auto once = augment(p, 7)[1];
    const auto twice = augment(FramePair::original("m", once.rgb, once.depth), 7)[1];
    c.expect(twice.rgb.samples() == p.rgb.samples() && twice.depth.samples() == p.depth.samples(),
             "mirror involution");
  }

  std::vector<FramePair> all;
  for (const auto& p : pairs) {
    all.push_back(p);
    for (auto& v : augment(p, 7)) all.push_back(std::move(v));
  }
  for (const std::size_t k : {0u, 1u, 5u, 11u}) {
    const auto m = split(all, k, 3);
    c.expect(m.test_families.size() == k, "test family count");
    const std::set<std::string> fams(m.test_families.begin(), m.test_families.end());
    const std::set<std::string> test(m.test_ids.begin(), m.test_ids.end());
    for (const auto& p : all) c.expect(test.count(p.source_id) == fams.count(family_of(p)), "family split");
    c.expect(m.test_ids.size() + m.train_ids.size() == all.size(), "split covers every pair");
  }
}

void codecs(Check& c) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    AnnotationLine a;
    a.class_id = static_cast<int>(gen() % 3);
    for (int i = 0, n = 3 + static_cast<int>(gen() % 6); i < n; ++i) a.coords.push_back({u(gen), u(gen)});
    const bool pred = trial % 2;
    if (pred) a.confidence = u(gen);
    const auto kind = pred ? AnnotationKind::kPrediction : AnnotationKind::kGroundTruth;
    c.expect(parse_annotation(emit_annotation(a), kind) == a, "annotation round trip");
  }

  auto positioned = [&](const std::string& line, ErrorCode code, std::size_t pos) {
    try {
      parse_annotation(line, AnnotationKind::kGroundTruth);
      c.expect(false, "accepted '" + line + "'");
    } catch (const Error& e) {
      c.expect(e.code() == code && e.position() == pos, "position for '" + line + "'");
    }
  };
  positioned("0 0.1 0.1 0.9 0.1 0.5 nan", ErrorCode::kMalformedLine, 7);
  positioned("0 0.1 0.1 0.9 0.1 0.5 -0.2", ErrorCode::kOutOfRangeCoordinate, 7);
  positioned("zero 0.1 0.1 0.9 0.1 0.5 0.9", ErrorCode::kMalformedLine, 1);
  try {
    parse_annotation("0 0.1 0.1 0.9", AnnotationKind::kGroundTruth);
    c.expect(false, "short line accepted");
  } catch (const Error& e) {
    c.expect(e.code() == ErrorCode::kMalformedLine && e.position().has_value(), "short line position");
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto scene = synth::generate(synth::random_spec({120, 90}, seed), {120, 90}, seed);
    const auto fr = synth::round_trip_check(scene).report;
    const auto t1 = emit_report(fr);
    c.expect(emit_report(frame_report_from_json(parse_json_text(t1))) == t1, "frame report round trip");
    const auto sc = oracle::random_scene(seed);
    const auto ms = evaluate(sc.dets, sc.gts);
    const auto t2 = emit_report(ms);
    c.expect(emit_report(metrics_summary_from_json(parse_json_text(t2))) == t2, "metrics round trip");
  }
  DepthEvalResult d{DepthUnits::kNormalized, {{"a", 0.1, 3}, {"b", 1.0 / 7.0, 9}}, 0.0};
  d.mean_rmse = (0.1 + 1.0 / 7.0) / 2.0;
  const auto t3 = emit_report(d);
  c.expect(emit_report(depth_eval_from_json(parse_json_text(t3))) == t3, "depth eval round trip");
}

}  // namespace

int main() {
  criterion(1, "damage percentages for five reference area sets", 1.0, damage_rows);
  criterion(2, "relative depth in both modes, carried by the report", 1.0, relative_depths);
  criterion(3, "100 noiseless synthetic scenes recover exact geometry and depths", 30.0, synthetic_scenes);
  criterion(4, "AP and confusion identities agree with brute force on 100 scenes", 60.0, metrics_oracle);
  criterion(5, "depth RMSE properties and the 2x2 hand case", 5.0, depth_eval_properties);
  criterion(6, "dataset prep determinism, mirror involution, family-atomic split", 30.0, dataset_prep);
  criterion(7, "annotation and report codecs round trip; errors carry positions", 30.0, codecs);
  return failures == 0 ? 0 : 1;
}
