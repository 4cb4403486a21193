#include <gtest/gtest.h>

#include <random>
#include <set>

#include "roadchar/dataset.hpp"
#include "roadchar/geometry.hpp"

using namespace roadchar;

namespace {

FramePair make_pair(const std::string& id, int w, int h, std::uint64_t seed, double missing = 0.1) {
  std::mt19937_64 gen(seed);
  RasterImage rgb(w, h, 3);
  for (auto& s : rgb.samples()) s = static_cast<std::uint8_t>(gen() % 256);
  DepthMap depth(w, h);
  for (auto& d : depth.samples()) {
    d = (gen() % 1000) < missing * 1000 ? 0 : static_cast<std::uint16_t>(500 + gen() % 4000);
  }
  return FramePair::original(id, std::move(rgb), std::move(depth));
}

FramePair blank_pair(const std::string& id) {
  return FramePair::original(id, RasterImage(8, 6, 3, 100), DepthMap(8, 6));
}

}  // namespace

TEST(FramePair, ValidatesIdAndSize) {
  EXPECT_THROW(FramePair::original("", RasterImage(4, 4, 3), DepthMap(4, 4)), Error);
  try {
    FramePair::original("a", RasterImage(4, 4, 3), DepthMap(5, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Clean, DropsAllZeroDepth) {
  std::vector<FramePair> pairs{blank_pair("z")};
  EXPECT_TRUE(clean(pairs).empty());
}

TEST(Clean, KeepsSingleValidSample) {
  auto p = blank_pair("one");
  p.depth.at(3, 2) = 1200;
  std::vector<FramePair> pairs{p};
  EXPECT_EQ(clean(pairs).size(), 1u);
}

TEST(Clean, CountsAndOrderAndIdempotence) {
  std::vector<FramePair> pairs;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back(i % 3 == 1 ? blank_pair("p" + std::to_string(i)) : make_pair("p" + std::to_string(i), 8, 6, i));
  }
  const auto once = clean(pairs);
  ASSERT_EQ(once.size(), 7u);
  for (std::size_t i = 1; i < once.size(); ++i) EXPECT_LT(once[i - 1].source_id, once[i].source_id);
  const auto twice = clean(once);
  ASSERT_EQ(twice.size(), once.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice[i].source_id, once[i].source_id);
}

TEST(Clean, ThresholdRange) {
  EXPECT_THROW(clean({}, 0.0), Error);
  EXPECT_THROW(clean({}, 1.5), Error);
  std::vector<FramePair> pairs{make_pair("half", 10, 10, 1, 0.5)};
  EXPECT_TRUE(clean(pairs, 0.2).empty());
  EXPECT_EQ(clean(pairs, 0.9).size(), 1u);
}

TEST(Augment, FourTaggedVariants) {
  const auto p = make_pair("cap", 12, 9, 4);
  const auto v = augment(p, 17);
  ASSERT_EQ(v.size(), 4u);
  const AugmentKind kinds[] = {AugmentKind::kSaturation, AugmentKind::kMirror, AugmentKind::kSaturationMirror,
                               AugmentKind::kRandom};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(v[i].provenance.kind, kinds[i]);
    EXPECT_EQ(v[i].provenance.family_id, "cap");
    EXPECT_EQ(v[i].source_id, std::string("cap__") + to_string(kinds[i]));
    EXPECT_EQ(v[i].rgb.size(), p.rgb.size());
    EXPECT_EQ(v[i].depth.size(), p.depth.size());
  }
  EXPECT_TRUE(v[3].provenance.random.has_value());
}

TEST(Augment, SaturationLeavesDepthAlone) {
  const auto p = make_pair("cap", 12, 9, 4);
  const auto v = augment(p, 1);
  EXPECT_EQ(v[0].depth.samples(), p.depth.samples());
  EXPECT_NE(v[0].rgb.samples(), p.rgb.samples());
}

TEST(Augment, MirrorIsBitExactInvolution) {
  const auto p = make_pair("cap", 13, 7, 9);
  const auto mirrored = augment(p, 3)[1];
  auto again = augment(FramePair::original("m", mirrored.rgb, mirrored.depth), 3)[1];
  EXPECT_EQ(again.rgb.samples(), p.rgb.samples());
  EXPECT_EQ(again.depth.samples(), p.depth.samples());
}

TEST(Augment, SaturationMirrorComposes) {
  const auto p = make_pair("cap", 10, 5, 2);
  const auto v = augment(p, 3);
  EXPECT_EQ(v[2].rgb.samples(), ops::mirror_horizontal(v[0].rgb).samples());
  EXPECT_EQ(v[2].depth.samples(), v[1].depth.samples());
}

TEST(Augment, DeterministicPerSeedAndId) {
  const auto p = make_pair("cap", 16, 12, 5);
  const auto a = augment(p, 42);
  const auto b = augment(p, 42);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a[i].rgb.samples(), b[i].rgb.samples());
    EXPECT_EQ(a[i].depth.samples(), b[i].depth.samples());
  }
  const auto c = augment(p, 43);
  const auto pa = *a[3].provenance.random, pc = *c[3].provenance.random;
  EXPECT_FALSE(pa.brightness == pc.brightness && pa.rotation_deg == pc.rotation_deg);
}

TEST(Augment, RandomParametersWithinRanges) {
  const RandomAugmentRanges r;
  for (int s = 0; s < 500; ++s) {
    const auto p = draw_random_params(static_cast<std::uint64_t>(s), "id" + std::to_string(s % 7), r);
    ASSERT_GE(p.brightness, 0.75);
    ASSERT_LE(p.brightness, 1.25);
    ASSERT_GE(p.contrast, 0.75);
    ASSERT_LE(p.contrast, 1.25);
    ASSERT_GE(p.saturation, 0.70);
    ASSERT_LE(p.saturation, 1.30);
    ASSERT_GE(p.rotation_deg, -15.0);
    ASSERT_LE(p.rotation_deg, 15.0);
  }
}

TEST(Augment, RotationExposesMissingDepthNotNewValues) {
  DepthMap d(21, 21, std::vector<std::uint16_t>(21 * 21, 1500));
  const auto r = ops::rotate(d, 15.0);
  EXPECT_EQ(r.at(10, 10), 1500);
  EXPECT_EQ(r.at(0, 0), DepthMap::kMissing);
  for (const auto v : r.samples()) ASSERT_TRUE(v == 1500 || v == DepthMap::kMissing);
}

TEST(Augment, ZeroRotationIsIdentity) {
  const auto p = make_pair("cap", 11, 8, 6);
  EXPECT_EQ(ops::rotate(p.depth, 0.0).samples(), p.depth.samples());
  EXPECT_EQ(ops::rotate(p.rgb, 0.0).samples(), p.rgb.samples());
}

TEST(Augment, MirrorPreservesMaskArea) {
  BinaryMask m(30, 20);
  for (int y = 3; y < 12; ++y)
    for (int x = 2; x < 2 + y; ++x) m.set(x, y);
  const auto mm = mirror_horizontal(m);
  const auto a = extract_instances(m), b = extract_instances(mm);
  ASSERT_EQ(a.size(), 1u);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(a[0].pixel_area, b[0].pixel_area);
  EXPECT_DOUBLE_EQ(a[0].contour_area, b[0].contour_area);
}

TEST(Resize, TargetDims) {
  const auto p = make_pair("big", 192, 108, 1);
  const auto r = resize_pair(p, {64, 64});
  EXPECT_EQ(r.rgb.width(), 64);
  EXPECT_EQ(r.depth.height(), 64);
}

TEST(Resize, OwnSizeIsIdentity) {
  const auto p = make_pair("same", 17, 13, 3);
  EXPECT_EQ(ops::resize_nearest(p.depth, p.depth.size()).samples(), p.depth.samples());
  const auto rgb = ops::resize_bilinear(p.rgb, p.rgb.size());
  for (std::size_t i = 0; i < rgb.samples().size(); ++i) {
    ASSERT_LE(std::abs(int(rgb.samples()[i]) - int(p.rgb.samples()[i])), 1);
  }
}

TEST(Resize, DepthValuesAreSubsetOfInput) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = make_pair("hole", 23, 19, s, 0.3);
    const std::set<std::uint16_t> in(p.depth.samples().begin(), p.depth.samples().end());
    for (Size t : {Size{7, 5}, Size{40, 33}, Size{23, 50}}) {
      const DepthMap r = ops::resize_nearest(p.depth, t);
      for (const auto v : r.samples()) ASSERT_TRUE(in.count(v));
    }
  }
}

TEST(Resize, RejectsNonPositiveTarget) {
  EXPECT_THROW(resize_pair(make_pair("x", 4, 4, 1), {0, 4}), Error);
}

namespace {

std::vector<FramePair> families(int n) {
  std::vector<FramePair> all;
  for (int i = 0; i < n; ++i) {
    const auto p = make_pair("f" + std::to_string(i), 4, 3, i);
    all.push_back(p);
    for (auto& v : augment(p, 1)) all.push_back(std::move(v));
  }
  return all;
}

}  // namespace

TEST(Split, FamilyAtomicWithRequestedCount) {
  const auto all = families(30);
  const auto m = split(all, 7, 11);
  EXPECT_EQ(m.test_families.size(), 7u);
  EXPECT_EQ(m.family_count, 30u);
  EXPECT_EQ(m.test_ids.size(), 35u);
  EXPECT_EQ(m.train_ids.size(), 115u);
  std::set<std::string> test_fams(m.test_families.begin(), m.test_families.end());
  std::set<std::string> seen;
  for (const auto& p : all) {
    const bool in_test = std::find(m.test_ids.begin(), m.test_ids.end(), p.source_id) != m.test_ids.end();
    const bool in_train = std::find(m.train_ids.begin(), m.train_ids.end(), p.source_id) != m.train_ids.end();
    ASSERT_NE(in_test, in_train);
    ASSERT_EQ(in_test, test_fams.count(family_of(p)) == 1);
    seen.insert(p.source_id);
  }
  EXPECT_EQ(seen.size(), all.size());
}

TEST(Split, ZeroTestAndDeterminism) {
  const auto all = families(5);
  const auto z = split(all, 0, 3);
  EXPECT_TRUE(z.test_ids.empty());
  EXPECT_EQ(z.train_ids.size(), all.size());
  const auto a = split(all, 2, 99), b = split(all, 2, 99);
  EXPECT_EQ(a.test_ids, b.test_ids);
  EXPECT_EQ(a.train_ids, b.train_ids);
}

TEST(Split, SeedsChangeSelection) {
  const auto all = families(40);
  std::set<std::vector<std::string>> picks;
  for (std::uint64_t s = 0; s < 8; ++s) picks.insert(split(all, 5, s).test_families);
  EXPECT_GT(picks.size(), 1u);
}

TEST(Split, InsufficientFamilies) {
  const auto all = families(3);
  try {
    split(all, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}
