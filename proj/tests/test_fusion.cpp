#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "archive_lens/fusion.hpp"
#include "support/scenes.hpp"

using namespace archive_lens;

namespace {

Detection det(double x0, double y0, double x1, double y1, double conf, std::string detector = "ssd",
              std::string label = "person") {
  return Detection{BoundingBox(x0, y0, x1, y1), std::move(label), conf, std::move(detector)};
}

}  // namespace

TEST(FusionConfig, ArchiveDefaults) {
  const auto c = FusionConfig::archive_defaults();
  EXPECT_EQ(c.per_detector_thresholds.at("mask_rcnn"), 0.7);
  EXPECT_EQ(c.per_detector_thresholds.at("retinanet"), 0.3);
  EXPECT_EQ(c.per_detector_thresholds.at("ssd"), 0.5);
  EXPECT_EQ(c.per_detector_thresholds.at("yolov3"), 0.6);
  EXPECT_EQ(c.grouping_iou_threshold, 0.1);
  EXPECT_EQ(c.merge_strategy, MergeStrategy::MeanCoordinates);
}

TEST(FusionConfig, Validation) {
  auto c = FusionConfig::archive_defaults();
  c.grouping_iou_threshold = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.grouping_iou_threshold = 1.0;
  EXPECT_NO_THROW(c.validate());
  c.per_detector_thresholds["ssd"] = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Thresholds, Examples) {
  const auto c = FusionConfig::archive_defaults();
  EXPECT_TRUE(apply_confidence_thresholds({}, c).empty());
  EXPECT_EQ(apply_confidence_thresholds({det(0, 0, 1, 1, 0.65, "yolov3")}, c).size(), 1u);
  EXPECT_TRUE(apply_confidence_thresholds({det(0, 0, 1, 1, 0.29, "retinanet")}, c).empty());
  // Exactly at the threshold is kept.
  EXPECT_EQ(apply_confidence_thresholds({det(0, 0, 1, 1, 0.5, "ssd")}, c).size(), 1u);
}

TEST(Thresholds, OrderPreservedAndUnknownDetectorNamed) {
  const auto c = FusionConfig::archive_defaults();
  std::vector<Detection> in = {det(0, 0, 1, 1, 0.9, "ssd"), det(0, 0, 2, 2, 0.1, "ssd"),
                               det(0, 0, 3, 3, 0.8, "mask_rcnn")};
  const auto out = apply_confidence_thresholds(in, c);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], in[0]);
  EXPECT_EQ(out[1], in[2]);
  try {
    apply_confidence_thresholds({det(0, 0, 1, 1, 0.9, "faster_rcnn")}, c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("faster_rcnn"), std::string::npos);
  }
}

TEST(GroupByIou, Examples) {
  EXPECT_EQ(group_by_iou({det(0, 0, 5, 5, 0.5)}, 0.1).size(), 1u);

  const auto two = group_by_iou({det(0, 0, 10, 10, 0.8), det(0, 0, 10, 10, 0.9)}, 0.1);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].size(), 2u);
  EXPECT_EQ(two[0][0].confidence, 0.9);

  // iou(A, B) = 81 / 119, iou(A, C) = 0.
  const auto a = det(0, 0, 10, 10, 0.9), b = det(1, 1, 11, 11, 0.8), c = det(50, 50, 60, 60, 0.7);
  const auto groups = group_by_iou({c, b, a}, 0.1);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0], (std::vector<Detection>{a, b}));
  EXPECT_EQ(groups[1], (std::vector<Detection>{c}));
}

TEST(GroupByIou, IouEqualToThetaDoesNotJoin) {
  // Overlap 50 of union 150 -> iou exactly 1/3 when compared against 1/3.
  const auto a = det(0, 0, 10, 10, 0.9), b = det(5, 0, 15, 10, 0.8);
  const double theta = iou(a.box, b.box);
  EXPECT_EQ(group_by_iou({a, b}, theta).size(), 2u);
  EXPECT_EQ(group_by_iou({a, b}, std::nextafter(theta, 0.0)).size(), 1u);
}

TEST(GroupByIou, MembersJoinOnlyThroughSeed) {
  // B overlaps A (seed) and C overlaps B but not A: C must start its own group.
  const auto a = det(0, 0, 10, 10, 0.9), b = det(6, 0, 16, 10, 0.8), c = det(12, 0, 22, 10, 0.7);
  const auto g = group_by_iou({a, b, c}, 0.1);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0], (std::vector<Detection>{a, b}));
  EXPECT_EQ(g[1], (std::vector<Detection>{c}));
}

TEST(GroupByIou, DuplicatesAreKept) {
  const auto a = det(0, 0, 10, 10, 0.9);
  const auto g = group_by_iou({a, a, a}, 0.1);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].size(), 3u);
}

TEST(MergeGroup, Examples) {
  const auto single = merge_group({det(1, 2, 3, 4, 0.6, "yolov3")}, MergeStrategy::MeanCoordinates);
  EXPECT_EQ(single.box, BoundingBox(1, 2, 3, 4));
  EXPECT_EQ(single.confidence, 0.6);

  const std::vector<Detection> pair = {det(0, 0, 10, 10, 0.9, "ssd"), det(2, 2, 12, 12, 0.8, "yolov3")};
  const auto mean = merge_group(pair, MergeStrategy::MeanCoordinates);
  EXPECT_EQ(mean.box, BoundingBox(1, 1, 11, 11));
  EXPECT_EQ(mean.confidence, 0.9);
  EXPECT_EQ(mean.source_detectors, (std::set<std::string>{"ssd", "yolov3"}));

  const auto best = merge_group(pair, MergeStrategy::HighestConfidence);
  EXPECT_EQ(best.box, BoundingBox(0, 0, 10, 10));
}

TEST(MergeGroup, Errors) {
  EXPECT_THROW(merge_group({}, MergeStrategy::MeanCoordinates), InvalidInput);
  EXPECT_THROW(merge_group({det(0, 0, 1, 1, .9), det(0, 0, 1, 1, .8, "ssd", "horse")},
                           MergeStrategy::MeanCoordinates),
               InvalidInput);
}

TEST(MergeGroup, MeanStaysInsideEnvelope) {
  // 0.1 * 3 / 3 != 0.1 in binary floating point without clamping.
  const std::vector<Detection> g = {det(0.1, 0.1, 0.7, 0.7, 0.9), det(0.1, 0.1, 0.7, 0.7, 0.8),
                                    det(0.1, 0.1, 0.7, 0.7, 0.7)};
  const auto f = merge_group(g, MergeStrategy::MeanCoordinates);
  EXPECT_EQ(f.box, BoundingBox(0.1, 0.1, 0.7, 0.7));
}

TEST(FuseImage, Examples) {
  const auto c = FusionConfig::archive_defaults();
  EXPECT_TRUE(fuse_image({det(0, 0, 5, 5, 0.2, "ssd"), det(0, 0, 5, 5, 0.1, "yolov3")}, c).empty());

  const std::vector<Detection> four = {
      det(100, 50, 300, 400, 0.92, "mask_rcnn"), det(104, 46, 296, 410, 0.55, "retinanet"),
      det(98, 52, 306, 396, 0.71, "ssd"), det(102, 48, 302, 402, 0.83, "yolov3")};
  const auto fused = fuse_image(four, c);
  ASSERT_EQ(fused.size(), 1u);
  EXPECT_EQ(fused[0].member_detections.size(), 4u);
  EXPECT_EQ(fused[0].box, BoundingBox(101, 49, 301, 402));
  EXPECT_EQ(fused[0].confidence, 0.92);

  const auto classes = fuse_image({det(0, 0, 10, 10, 0.9), det(0, 0, 10, 10, 0.9, "ssd", "horse")}, c);
  EXPECT_EQ(classes.size(), 2u);
}

TEST(FuseImage, OutputOrdering) {
  const auto c = FusionConfig::archive_defaults();
  const auto out = fuse_image({det(0, 0, 10, 10, 0.7, "ssd", "person"), det(50, 50, 60, 60, 0.9),
                               det(0, 0, 10, 10, 0.7, "ssd", "horse"), det(20, 0, 30, 10, 0.7)},
                              c);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].confidence, 0.9);
  EXPECT_EQ(out[1].class_label, "horse");
  EXPECT_EQ(out[2].box.x_min(), 0);
  EXPECT_EQ(out[3].box.x_min(), 20);
}

TEST(FuseImage, RandomScenesPermutationInvariantAndConserving) {
  std::mt19937_64 rng(99);
  const auto cfg = FusionConfig::archive_defaults();
  for (int t = 0; t < 50; ++t) {
    auto scene = scenes::random_scene(rng);
    const auto ref = fuse_image(scene.detections, cfg);
    std::shuffle(scene.detections.begin(), scene.detections.end(), rng);
    EXPECT_EQ(fuse_image(scene.detections, cfg), ref);

    std::size_t members = 0;
    for (const auto& f : ref) {
      members += f.member_detections.size();
      double lo[4] = {1e300, 1e300, 1e300, 1e300}, hi[4] = {-1e300, -1e300, -1e300, -1e300};
      for (const auto& m : f.member_detections) {
        EXPECT_EQ(m.class_label, f.class_label);
        const double c[4] = {m.box.x_min(), m.box.y_min(), m.box.x_max(), m.box.y_max()};
        for (int k = 0; k < 4; ++k) {
          lo[k] = std::min(lo[k], c[k]);
          hi[k] = std::max(hi[k], c[k]);
        }
      }
      const double fc[4] = {f.box.x_min(), f.box.y_min(), f.box.x_max(), f.box.y_max()};
      for (int k = 0; k < 4; ++k) {
        EXPECT_GE(fc[k], lo[k]);
        EXPECT_LE(fc[k], hi[k]);
      }
    }
    EXPECT_EQ(members, apply_confidence_thresholds(scene.detections, cfg).size());
  }
}

TEST(FuseImage, GreedyConsistency) {
  // Every member joined the first seed, in confidence order, whose iou with it exceeds theta.
  std::mt19937_64 rng(5);
  const auto cfg = FusionConfig::archive_defaults();
  for (int t = 0; t < 50; ++t) {
    const auto scene = scenes::random_scene(rng);
    const auto fused = fuse_image(scene.detections, cfg);
    for (const auto& label : {"person", "horse", "car"}) {
      std::vector<const FusedDetection*> seeds;
      for (const auto& f : fused) {
        if (f.class_label == label) seeds.push_back(&f);
      }
      std::sort(seeds.begin(), seeds.end(), [](auto* a, auto* b) {
        return detail::confidence_order(a->member_detections.front(), b->member_detections.front());
      });
      for (std::size_t g = 0; g < seeds.size(); ++g) {
        const auto& seed = seeds[g]->member_detections.front();
        for (std::size_t m = 1; m < seeds[g]->member_detections.size(); ++m) {
          const auto& member = seeds[g]->member_detections[m];
          EXPECT_GT(iou(seed.box, member.box), cfg.grouping_iou_threshold);
          for (std::size_t e = 0; e < g; ++e) {
            EXPECT_LE(iou(seeds[e]->member_detections.front().box, member.box), cfg.grouping_iou_threshold);
          }
        }
      }
    }
  }
}
