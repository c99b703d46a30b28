#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "archive_lens/error.hpp"
#include "archive_lens/geometry.hpp"

namespace archive_lens {

struct Detection {
  BoundingBox box;
  std::string class_label;
  double confidence = 0.0;
  std::string detector_id;

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class MergeStrategy { MeanCoordinates, HighestConfidence };

struct FusionConfig {
  std::map<std::string, double> per_detector_thresholds;
  double grouping_iou_threshold = 0.1;
  MergeStrategy merge_strategy = MergeStrategy::MeanCoordinates;

  // Per-detector thresholds for the default four-detector ensemble.
  static FusionConfig archive_defaults() {
    FusionConfig c;
    c.per_detector_thresholds = {
        {"mask_rcnn", 0.7}, {"retinanet", 0.3}, {"ssd", 0.5}, {"yolov3", 0.6}};
    return c;
  }

  void validate() const {
    if (!(grouping_iou_threshold > 0.0 && grouping_iou_threshold <= 1.0)) {
      throw ConfigError("grouping IoU threshold must lie in (0, 1]");
    }
    for (const auto& [id, t] : per_detector_thresholds) {
      if (!(t >= 0.0 && t <= 1.0)) {
        throw ConfigError("confidence threshold for detector '" + id + "' must lie in [0, 1]");
      }
    }
  }
};

struct FusedDetection {
  BoundingBox box;
  std::string class_label;
  double confidence = 0.0;
  std::vector<Detection> member_detections;
  std::set<std::string> source_detectors;

  friend bool operator==(const FusedDetection&, const FusedDetection&) = default;
};

inline const char* to_string(MergeStrategy s) {
  return s == MergeStrategy::MeanCoordinates ? "mean_coordinates" : "highest_confidence";
}

inline MergeStrategy merge_strategy_from_string(const std::string& s) {
  if (s == "mean_coordinates" || s == "mean") return MergeStrategy::MeanCoordinates;
  if (s == "highest_confidence" || s == "max") return MergeStrategy::HighestConfidence;
  throw ConfigError("unknown merge strategy '" + s + "'");
}

namespace detail {

using DetectionKey = std::tuple<double, const std::string&, double, double, double, double,
                                const std::string&>;

inline DetectionKey detection_key(const Detection& d) {
  return {-d.confidence, d.detector_id, d.box.x_min(), d.box.y_min(),
          d.box.x_max(),  d.box.y_max(),  d.class_label};
}

// Descending confidence; ties by (detector_id, x_min, y_min, x_max, y_max).
inline bool confidence_order(const Detection& a, const Detection& b) {
  return detection_key(a) < detection_key(b);
}

inline bool fused_order(const FusedDetection& a, const FusedDetection& b) {
  using Key = std::tuple<double, const std::string&, double, double, double, double>;
  const Key ka{-a.confidence, a.class_label, a.box.x_min(), a.box.y_min(), a.box.x_max(),
               a.box.y_max()};
  const Key kb{-b.confidence, b.class_label, b.box.x_min(), b.box.y_min(), b.box.x_max(),
               b.box.y_max()};
  if (ka != kb) return ka < kb;
  return std::lexicographical_compare(
      a.member_detections.begin(), a.member_detections.end(), b.member_detections.begin(),
      b.member_detections.end(), confidence_order);
}

}  // namespace detail

// Keeps detections whose confidence reaches their detector's threshold.
inline std::vector<Detection> apply_confidence_thresholds(const std::vector<Detection>& detections,
                                                          const FusionConfig& config) {
  std::vector<Detection> kept;
  kept.reserve(detections.size());
  for (const auto& d : detections) {
    auto it = config.per_detector_thresholds.find(d.detector_id);
    if (it == config.per_detector_thresholds.end()) {
      throw ConfigError("no confidence threshold configured for detector '" + d.detector_id + "'");
    }
    if (d.confidence >= it->second) kept.push_back(d);
  }
  return kept;
}

// Greedy grouping of single-class detections. The most confident remaining
// detection seeds a group and absorbs every remaining detection whose IoU
// with it is strictly above theta.
inline std::vector<std::vector<Detection>> group_by_iou(std::vector<Detection> detections,
                                                        double theta) {
  std::sort(detections.begin(), detections.end(), detail::confidence_order);
  std::vector<std::vector<Detection>> groups;
  std::vector<bool> used(detections.size(), false);
  for (std::size_t s = 0; s < detections.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<Detection> group{detections[s]};
    for (std::size_t j = s + 1; j < detections.size(); ++j) {
      if (!used[j] && iou(detections[s].box, detections[j].box) > theta) {
        used[j] = true;
        group.push_back(detections[j]);
      }
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

inline FusedDetection merge_group(const std::vector<Detection>& group, MergeStrategy strategy) {
  if (group.empty()) throw InvalidInput("merge_group: empty group");

  FusedDetection out;
  out.class_label = group.front().class_label;
  const auto best = std::min_element(group.begin(), group.end(), detail::confidence_order);
  out.confidence = best->confidence;

  if (strategy == MergeStrategy::HighestConfidence) {
    out.box = best->box;
  } else {
    double sum[4] = {0, 0, 0, 0};
    double lo[4], hi[4];
    for (std::size_t i = 0; i < group.size(); ++i) {
      const BoundingBox& b = group[i].box;
      const double c[4] = {b.x_min(), b.y_min(), b.x_max(), b.y_max()};
      for (int k = 0; k < 4; ++k) {
        sum[k] += c[k];
        lo[k] = i == 0 ? c[k] : std::min(lo[k], c[k]);
        hi[k] = i == 0 ? c[k] : std::max(hi[k], c[k]);
      }
    }
    const double n = static_cast<double>(group.size());
    double mean[4];
    for (int k = 0; k < 4; ++k) {
      // Rounding can push a mean a hair outside the member envelope.
      mean[k] = std::clamp(sum[k] / n, lo[k], hi[k]);
    }
    out.box = BoundingBox(mean[0], mean[1], mean[2], mean[3]);
  }

  for (const auto& d : group) {
    if (d.class_label != out.class_label) {
      throw InvalidInput("merge_group: mixed classes '" + out.class_label + "' and '" +
                         d.class_label + "'");
    }
    out.source_detectors.insert(d.detector_id);
  }
  out.member_detections = group;
  std::sort(out.member_detections.begin(), out.member_detections.end(),
            detail::confidence_order);
  return out;
}

// Full per-image pipeline: threshold, split by class, group, merge.
// Output order is descending confidence, then class label and box corner.
inline std::vector<FusedDetection> fuse_image(const std::vector<Detection>& detections,
                                              const FusionConfig& config) {
  config.validate();
  const auto kept = apply_confidence_thresholds(detections, config);

  std::map<std::string, std::vector<Detection>> by_class;
  for (const auto& d : kept) by_class[d.class_label].push_back(d);

  std::vector<FusedDetection> fused;
  for (auto& [label, dets] : by_class) {
    for (const auto& g : group_by_iou(std::move(dets), config.grouping_iou_threshold)) {
      fused.push_back(merge_group(g, config.merge_strategy));
    }
  }
  std::sort(fused.begin(), fused.end(), detail::fused_order);
  return fused;
}

}  // namespace archive_lens
