#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "archive_lens/error.hpp"
#include "archive_lens/geometry.hpp"
#include "archive_lens/photo.hpp"

namespace archive_lens {

enum class FramingClass { CloseUp, MediumShot, OverallShot };

inline const char* to_string(FramingClass f) {
  switch (f) {
    case FramingClass::CloseUp: return "close_up";
    case FramingClass::MediumShot: return "medium_shot";
    case FramingClass::OverallShot: return "overall_shot";
  }
  return "?";
}

// Boundary values (exactly 0.65 or 0.10) fall into the medium class.
struct FramingConfig {
  double closeup_min_fraction = 0.65;
  double overall_max_fraction = 0.10;

  void validate() const {
    if (!(0.0 < overall_max_fraction && overall_max_fraction < closeup_min_fraction &&
          closeup_min_fraction < 1.0)) {
      throw ConfigError("framing thresholds must satisfy 0 < overall < closeup < 1");
    }
  }
};

// Area fraction of the largest person box (after clipping), or nullopt
// when the photo has no person detection.
inline std::optional<double> largest_person_fraction(const std::vector<FusedDetection>& detections,
                                                     double image_width, double image_height) {
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw InvalidInput("image dimensions must be positive");
  }
  std::optional<double> best;
  for (const auto& d : detections) {
    if (d.class_label != kPersonClass) continue;
    const double f = area_fraction(d.box, image_width, image_height);
    if (!best || f > *best) best = f;
  }
  return best;
}

inline std::optional<FramingClass> classify_framing(const std::vector<FusedDetection>& detections,
                                                    double image_width, double image_height,
                                                    const FramingConfig& config = {}) {
  config.validate();
  const auto f = largest_person_fraction(detections, image_width, image_height);
  if (!f) return std::nullopt;
  if (*f > config.closeup_min_fraction) return FramingClass::CloseUp;
  if (*f < config.overall_max_fraction) return FramingClass::OverallShot;
  return FramingClass::MediumShot;
}

struct FramingShares {
  std::size_t person_photos = 0;
  double close_up = 0.0;
  double medium_shot = 0.0;
  double overall_shot = 0.0;
};

// Per photographer. nullopt marks a photographer without any person photo.
using FramingDistribution = std::map<std::string, std::optional<FramingShares>>;

inline FramingDistribution framing_distribution(const std::vector<PhotoRecord>& photos,
                                                const FramingConfig& config = {}) {
  std::map<std::string, std::array<std::size_t, 3>> counts;
  for (const auto& p : photos) {
    auto& c = counts[p.photographer_id];
    const auto cls = classify_framing(p.fused_detections, p.image_width, p.image_height, config);
    if (cls) ++c[static_cast<std::size_t>(*cls)];
  }

  FramingDistribution out;
  for (const auto& [id, c] : counts) {
    const std::size_t total = c[0] + c[1] + c[2];
    if (total == 0) {
      out[id] = std::nullopt;
      continue;
    }
    FramingShares s;
    s.person_photos = total;
    const double n = static_cast<double>(total);
    s.close_up = static_cast<double>(c[0]) / n;
    s.medium_shot = static_cast<double>(c[1]) / n;
    s.overall_shot = static_cast<double>(c[2]) / n;
    out[id] = s;
  }
  return out;
}

}  // namespace archive_lens
