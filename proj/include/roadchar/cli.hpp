#pragma once

// Batch command-line surface. `run` is the whole program minus main() so the
// test suite can drive it in-process.
//
// Exit status: 0 success, 1 data error (JSON diagnostic on stderr), 2 usage.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "roadchar/annotation.hpp"
#include "roadchar/characterize.hpp"
#include "roadchar/config.hpp"
#include "roadchar/dataset.hpp"
#include "roadchar/depth_eval.hpp"
#include "roadchar/geometry.hpp"
#include "roadchar/metrics.hpp"
#include "roadchar/overlay.hpp"
#include "roadchar/png_io.hpp"
#include "roadchar/report.hpp"
#include "roadchar/synth.hpp"

namespace roadchar::cli {

namespace fs = std::filesystem;

namespace detail {

// Flags that override config keys. Flag name is the key with '-' for '_'.
inline const std::vector<std::string>& overridable_keys() {
  static const std::vector<std::string> keys{
      "band_radius",    "rpd_mode",         "depth_range_mm",   "conf_threshold",
      "iou_threshold",  "connectivity",     "min_valid_fraction", "percent_decimals",
      "depth_decimals", "frame_width",      "frame_height",     "zero_fraction_threshold"};
  return keys;
}

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::optional<std::string>> overrides;

  // The file layer is already validated, so a failure here is the flags' fault.
  void apply_flags(Config& c) const {
    for (const auto& [key, value] : overrides) {
      if (value) set_config_value(c, key, *value);
    }
    if (seed) c.seed = *seed;
    c.validate();
  }
};

inline void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw Error(ErrorCode::kIo, std::string(what) + " is not a directory: " + p.string());
}

inline std::set<std::string> ids_with_extension(const fs::path& dir, const std::string& ext) {
  std::set<std::string> ids;
  if (!fs::is_directory(dir)) return ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) ids.insert(e.path().stem().string());
  }
  return ids;
}

// Directories may be given as the dataset root or as the rgb/ subfolder.
inline fs::path rgb_dir(const fs::path& p) {
  return fs::is_directory(p / "rgb") ? p / "rgb" : p;
}

inline void write_error(std::ostream& err, const Error& e) {
  Json j;
  j["error"] = std::string(to_string(e.code()));
  j["detail"] = e.detail();
  j["position"] = e.position() ? Json(*e.position()) : Json(nullptr);
  err << j.dump() << '\n';
}

inline BinaryMask prediction_mask(const fs::path& preds, const std::string& id, Size frame, const Config& cfg) {
  BinaryMask all(frame.width, frame.height);
  if (const auto txt = preds / (id + ".txt"); fs::exists(txt)) {
    for (const auto& line : read_annotation_file(txt, AnnotationKind::kPrediction)) {
      if (*line.confidence < cfg.conf_threshold) continue;
      all |= rasterize_pixels(Polygon(line.coords).to_pixels(frame), frame);
    }
  } else if (const auto png_path = preds / (id + ".png"); fs::exists(png_path)) {
    all = png::read_mask(png_path);
    if (all.size() != frame) {
      throw Error(ErrorCode::kDimensionMismatch, "prediction mask " + png_path.string() + " differs from frame size");
    }
  }
  return all;
}

// ------------------------------------------------------------------- prep

struct PrepArgs {
  fs::path input, out;
  std::size_t test_count = 0;
  bool no_augment = false;
};

inline Json provenance_json(const FramePair& p) {
  Json j;
  j["id"] = p.source_id;
  j["family"] = family_of(p);
  j["kind"] = to_string(p.provenance.kind);
  j["seed"] = p.provenance.seed ? Json(*p.provenance.seed) : Json(nullptr);
  if (const auto& r = p.provenance.random) {
    j["random"] = {{"brightness", r->brightness},
                   {"contrast", r->contrast},
                   {"saturation", r->saturation},
                   {"rotation_deg", r->rotation_deg},
                   {"flip", r->flip}};
  } else {
    j["random"] = nullptr;
  }
  return j;
}

inline int prep(const PrepArgs& a, const Config& cfg, std::ostream& out) {
  const fs::path rgb = a.input / "rgb", depth = a.input / "depth";
  require_dir(rgb, "input rgb directory");
  require_dir(depth, "input depth directory");
  const auto rgb_ids = ids_with_extension(rgb, ".png");
  const auto depth_ids = ids_with_extension(depth, ".png");
  std::string unmatched;
  for (const auto& id : rgb_ids) {
    if (!depth_ids.count(id)) unmatched += (unmatched.empty() ? "" : ",") + ("depth:" + id);
  }
  for (const auto& id : depth_ids) {
    if (!rgb_ids.count(id)) unmatched += (unmatched.empty() ? "" : ",") + ("rgb:" + id);
  }
  if (!unmatched.empty()) throw Error(ErrorCode::kMissingCounterpart, "no counterpart for " + unmatched);

  std::vector<FramePair> originals;
  for (const auto& id : rgb_ids) {
    originals.push_back(FramePair::original(id, png::read_rgb(rgb / (id + ".png")), png::read_depth(depth / (id + ".png"))));
  }
  const std::size_t before = originals.size();
  std::vector<std::string> removed;
  {
    std::set<std::string> kept;
    originals = clean(std::move(originals), cfg.zero_fraction_threshold);
    for (const auto& p : originals) kept.insert(p.source_id);
    for (const auto& id : rgb_ids) {
      if (!kept.count(id)) removed.push_back(id);
    }
  }

  const Size target{cfg.frame_width, cfg.frame_height};
  std::vector<FramePair> all;
  for (const auto& p : originals) {
    all.push_back(resize_pair(p, target));
    if (a.no_augment) continue;
    for (auto& v : augment(p, cfg.seed)) all.push_back(resize_pair(v, target));
  }
  const SplitManifest m = split(all, a.test_count, cfg.seed);

  Json pairs = Json::array();
  for (const auto& p : all) {
    png::write_image(a.out / "rgb" / (p.source_id + ".png"), p.rgb);
    png::write_depth(a.out / "depth" / (p.source_id + ".png"), p.depth);
    pairs.push_back(provenance_json(p));
  }
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "split_manifest";
  j["seed"] = m.seed;
  j["width"] = target.width;
  j["height"] = target.height;
  j["input_pairs"] = before;
  j["removed"] = removed;
  j["family_count"] = m.family_count;
  j["test_family_count"] = m.test_families.size();
  j["test_families"] = m.test_families;
  j["train_ids"] = m.train_ids;
  j["test_ids"] = m.test_ids;
  j["pairs"] = std::move(pairs);
  write_text(a.out / "manifest.json", j.dump(2) + "\n");
  out << "prep: " << all.size() << " pairs (" << removed.size() << " removed), " << m.test_ids.size()
      << " test / " << m.train_ids.size() << " train\n";
  return 0;
}

// ----------------------------------------------------------- characterize

struct CharacterizeArgs {
  fs::path frames, preds, depths, out;
};

inline int characterize(const CharacterizeArgs& a, const Config& cfg, std::ostream& out) {
  const fs::path rgb = rgb_dir(a.frames);
  require_dir(rgb, "frames");
  require_dir(a.preds, "preds");
  const bool with_depth = !a.depths.empty();
  if (with_depth) require_dir(a.depths, "depths");
  const DisplayRules display = DisplayRules::from(cfg);

  std::string csv = frame_csv_header();
  std::size_t frames = 0, potholes = 0;
  for (const auto& id : ids_with_extension(rgb, ".png")) {
    const RasterImage image = png::read_rgb(rgb / (id + ".png"));
    const Size frame = image.size();
    const auto instances = extract_instances(prediction_mask(a.preds, id, frame, cfg), cfg.connectivity_mode());
    const double area = static_cast<double>(frame.area());

    FrameReport report;
    std::optional<NormalizedDepth> depth;
    if (with_depth) {
      const fs::path dp = a.depths / (id + ".png");
      if (!fs::exists(dp)) throw Error(ErrorCode::kMissingCounterpart, "no depth for frame " + id);
      const DepthMap raw = png::read_depth(dp);
      if (raw.size() != frame) throw Error(ErrorCode::kDimensionMismatch, "depth of " + id + " differs from frame size");
      depth = normalize_depth(raw, cfg.depth_range_mm);
      report = frame_report(id, instances, area, *depth, cfg.characterize());
    } else {
      report = frame_report(id, instances, area, cfg.characterize());
    }
    write_text(a.out / "reports" / (id + ".json"), emit_report(report, display));
    png::write_image(a.out / "overlays" / (id + ".png"), render_overlay(image, depth, report).image);
    csv += frame_csv_rows(report);
    ++frames;
    potholes += report.potholes.size();
  }
  write_text(a.out / "potholes.csv", csv);
  out << "characterize: " << frames << " frames, " << potholes << " potholes\n";
  return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  fs::path labels, preds, frames, out;
};

inline int evaluate(const EvaluateArgs& a, const Config& cfg, std::ostream& out) {
  require_dir(a.labels, "labels");
  require_dir(a.preds, "preds");
  std::set<std::string> ids = ids_with_extension(a.labels, ".txt");
  for (const auto& id : ids_with_extension(a.preds, ".txt")) ids.insert(id);

  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
  for (const auto& id : ids) {
    Size frame{cfg.frame_width, cfg.frame_height};
    if (!a.frames.empty()) {
      const fs::path img = rgb_dir(a.frames) / (id + ".png");
      if (!fs::exists(img)) throw Error(ErrorCode::kMissingCounterpart, "no frame image for " + id);
      frame = png::read_rgb(img).size();
    }
    if (const auto p = a.labels / (id + ".txt"); fs::exists(p)) {
      for (const auto& l : read_annotation_file(p, AnnotationKind::kGroundTruth)) gts.push_back(to_ground_truth(l, id, frame));
    }
    if (const auto p = a.preds / (id + ".txt"); fs::exists(p)) {
      for (const auto& l : read_annotation_file(p, AnnotationKind::kPrediction)) dets.push_back(to_detection(l, id, frame));
    }
  }
  MetricsSummary summary = roadchar::evaluate(dets, gts, cfg.conf_threshold, cfg.iou_threshold);
  summary.frame_count = ids.size();
  const std::string json = emit_report(summary, DisplayRules::from(cfg));
  if (!a.out.empty()) {
    write_text(a.out / "metrics.json", json);
    write_text(a.out / "curves.csv", curves_csv(summary));
  }
  out << "evaluate: box mAP50 " << format_fixed(summary.box.mean.ap50, 3) << " mAP50-95 "
      << format_fixed(summary.box.mean.ap50_95, 3) << ", mask mAP50 " << format_fixed(summary.mask.mean.ap50, 3)
      << " mAP50-95 " << format_fixed(summary.mask.mean.ap50_95, 3) << '\n';
  return 0;
}

// ------------------------------------------------------------- depth-eval

struct DepthEvalArgs {
  fs::path pred, gt, out;
  std::string units = "normalized";
};

inline int depth_eval(const DepthEvalArgs& a, const Config& cfg, std::ostream& out) {
  const DepthUnits units = a.units == "mm" ? DepthUnits::kMillimeters : DepthUnits::kNormalized;
  const DepthEvalResult r = evaluate_set(a.pred, a.gt, units, cfg.depth_range_mm);
  const DisplayRules display = DisplayRules::from(cfg);
  if (!a.out.empty()) {
    write_text(a.out / "depth_eval.json", emit_report(r, display));
    write_text(a.out / "depth_eval.csv", depth_eval_csv(r));
  }
  out << "depth-eval: " << r.frames.size() << " frames, mean RMSE " << format_fixed(r.mean_rmse, cfg.depth_decimals)
      << ' ' << to_string(units) << '\n';
  return 0;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  fs::path out;
  int count = 10;
  double noise = 0.0;
  double speckle = 0.0;
  double pred_confidence = 0.9;
};

inline Json expected_json(const synth::SyntheticScene& s) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "synth_expected";
  j["frame_id"] = s.frame_id;
  j["seed"] = s.seed;
  j["plane_depth"] = s.spec.plane_depth;
  j["noise_sigma"] = s.spec.noise_sigma;
  j["total_area"] = s.expected_total_area;
  j["damage_percent"] = s.expected_damage_percent;
  Json ps = Json::array();
  for (const auto& e : s.expected) {
    ps.push_back({{"pixel_area", e.pixel_area},
                  {"contour_area", e.contour_area},
                  {"bbox", {e.bbox.x_min, e.bbox.y_min, e.bbox.x_max, e.bbox.y_max}},
                  {"band_pixels", e.band_pixels},
                  {"depth_ok", e.depth_ok},
                  {"p_d", e.p_d},
                  {"s_d", e.s_d}});
  }
  j["potholes"] = std::move(ps);
  return j;
}

inline int synth_scenes(const SynthArgs& a, const Config& cfg, std::ostream& out) {
  if (a.count < 0) throw Error(ErrorCode::kInvalidArgument, "count must be >= 0");
  if (!(a.pred_confidence >= 0.0 && a.pred_confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pred confidence must be in [0,1]");
  }
  const Size frame{cfg.frame_width, cfg.frame_height};
  synth::RandomSceneOptions opt;
  opt.noise_sigma = a.noise;
  opt.missing_speckle = a.speckle;
  for (int i = 0; i < a.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%04d", i);
    const std::uint64_t scene_seed = derive_seed(cfg.seed, name);
    synth::SceneSpec spec = synth::random_spec(frame, scene_seed, opt);
    spec.depth_range_mm = cfg.depth_range_mm;
    spec.band_radius = cfg.band_radius;
    spec.min_valid_fraction = cfg.min_valid_fraction;
    const auto scene = synth::generate(spec, frame, scene_seed, name);

    png::write_image(a.out / "rgb" / (std::string(name) + ".png"), scene.pair.rgb);
    png::write_depth(a.out / "depth" / (std::string(name) + ".png"), scene.pair.depth);
    png::write_mask(a.out / "masks" / (std::string(name) + ".png"), scene.mask);
    std::vector<AnnotationLine> labels, preds;
    for (const auto& poly : scene.ground_truth) {
      labels.push_back({0, poly.vertices(), std::nullopt});
      preds.push_back({0, poly.vertices(), a.pred_confidence});
    }
    write_annotation_file(a.out / "labels" / (std::string(name) + ".txt"), labels);
    write_annotation_file(a.out / "preds" / (std::string(name) + ".txt"), preds);
    write_text(a.out / "expected" / (std::string(name) + ".json"), expected_json(scene).dump(2) + "\n");
  }
  out << "synth: " << a.count << " scenes\n";
  return 0;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pothole characterization from RGB-depth frames", "roadchar"};
  app.require_subcommand(1);

  detail::CommonOptions common;

  detail::PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "clean, augment, resize and split a dataset directory");
  prep_cmd->add_option("--input", prep.input, "directory with rgb/ and depth/")->required();
  prep_cmd->add_option("--out", prep.out, "output dataset directory")->required();
  prep_cmd->add_option("--test-count", prep.test_count, "number of test families");
  prep_cmd->add_option("--width", common.overrides["frame_width"], "target width");
  prep_cmd->add_option("--height", common.overrides["frame_height"], "target height");
  prep_cmd->add_flag("--no-augment", prep.no_augment, "keep originals only");

  detail::CharacterizeArgs ch;
  auto* ch_cmd = app.add_subcommand("characterize", "per-frame pothole reports and overlays");
  ch_cmd->add_option("--frames", ch.frames, "RGB frames (dataset root or rgb/)")->required();
  ch_cmd->add_option("--preds", ch.preds, "predictions: <id>.txt polygons or <id>.png masks")->required();
  ch_cmd->add_option("--depths", ch.depths, "16-bit depth PNGs in millimeters");
  ch_cmd->add_option("--out", ch.out, "output directory")->required();

  detail::EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "detection and segmentation metrics");
  ev_cmd->add_option("--labels", ev.labels, "ground-truth <id>.txt files")->required();
  ev_cmd->add_option("--preds", ev.preds, "prediction <id>.txt files")->required();
  ev_cmd->add_option("--frames", ev.frames, "frame images giving each frame's size");
  ev_cmd->add_option("--out", ev.out, "output directory");

  detail::DepthEvalArgs de;
  auto* de_cmd = app.add_subcommand("depth-eval", "RMSE of predicted against reference depth");
  de_cmd->add_option("--pred", de.pred, "predicted depth PNGs")->required();
  de_cmd->add_option("--gt", de.gt, "reference depth PNGs")->required();
  de_cmd->add_option("--units", de.units, "normalized or mm")->check(CLI::IsMember({"normalized", "mm"}));
  de_cmd->add_option("--out", de.out, "output directory");

  detail::SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "synthetic scenes with known answers");
  sy_cmd->add_option("--out", sy.out, "output directory")->required();
  sy_cmd->add_option("--count", sy.count, "number of scenes");
  sy_cmd->add_option("--noise", sy.noise, "depth noise sigma (normalized)");
  sy_cmd->add_option("--speckle", sy.speckle, "missing-depth speckle probability");
  sy_cmd->add_option("--pred-confidence", sy.pred_confidence, "confidence written on predictions");
  sy_cmd->add_option("--width", common.overrides["frame_width"], "frame width");
  sy_cmd->add_option("--height", common.overrides["frame_height"], "frame height");

  for (auto* cmd : {prep_cmd, ch_cmd, ev_cmd, de_cmd, sy_cmd}) {
    const bool seeded = cmd == prep_cmd || cmd == sy_cmd;
    cmd->add_option("--config", common.config_path, "key = value config file (fallback: $ROADCHAR_CONFIG)");
    if (seeded) cmd->add_option("--seed", common.seed, "seed for every random choice");
    for (const auto& key : detail::overridable_keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (cmd->get_option_no_throw(flag) == nullptr) cmd->add_option(flag, common.overrides[key], "override " + key);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  Config cfg;
  try {
    cfg = resolve_config(common.config_path);
  } catch (const Error& e) {
    detail::write_error(err, e);
    return 1;
  }
  try {
    common.apply_flags(cfg);
  } catch (const Error& e) {
    detail::write_error(err, e);
    return 2;
  }

  try {
    if (prep_cmd->parsed()) return detail::prep(prep, cfg, out);
    if (ch_cmd->parsed()) return detail::characterize(ch, cfg, out);
    if (ev_cmd->parsed()) return detail::evaluate(ev, cfg, out);
    if (de_cmd->parsed()) return detail::depth_eval(de, cfg, out);
    if (sy_cmd->parsed()) return detail::synth_scenes(sy, cfg, out);
  } catch (const Error& e) {
    detail::write_error(err, e);
    return 1;
  } catch (const fs::filesystem_error& e) {
    detail::write_error(err, Error(ErrorCode::kIo, e.what()));
    return 1;
  }
  return 2;
}

}  // namespace roadchar::cli
