#pragma once

// Random multi-detector scenes for property tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "archive_lens/fusion.hpp"

namespace scenes {

inline const std::vector<std::string>& detectors() {
  static const std::vector<std::string> ids = {"mask_rcnn", "retinanet", "ssd", "yolov3"};
  return ids;
}

struct Scene {
  double width;
  double height;
  std::vector<archive_lens::Detection> detections;
};

// Objects on an integer-valued canvas; every detector sees each object with
// some probability and reports a jittered box. Coordinates stay integral
// so that rescaling by small integers is exact.
inline Scene random_scene(std::mt19937_64& rng) {
  static const std::vector<std::string> classes = {"person", "person", "horse", "car"};
  std::uniform_int_distribution<int> dim(200, 800);
  Scene s{static_cast<double>(dim(rng)), static_cast<double>(dim(rng)), {}};
  std::uniform_int_distribution<int> n_obj(0, 6);
  std::uniform_int_distribution<int> cls(0, static_cast<int>(classes.size()) - 1);
  std::uniform_int_distribution<int> jitter(-6, 6);
  std::uniform_real_distribution<double> conf(0.05, 1.0);
  std::bernoulli_distribution seen(0.7);

  const int objects = n_obj(rng);
  for (int o = 0; o < objects; ++o) {
    const int w = std::uniform_int_distribution<int>(10, static_cast<int>(s.width) / 2)(rng);
    const int h = std::uniform_int_distribution<int>(10, static_cast<int>(s.height) / 2)(rng);
    const int x = std::uniform_int_distribution<int>(0, static_cast<int>(s.width) - w)(rng);
    const int y = std::uniform_int_distribution<int>(0, static_cast<int>(s.height) - h)(rng);
    const std::string label = classes[cls(rng)];
    for (const auto& det : detectors()) {
      if (!seen(rng)) continue;
      const double x0 = std::clamp(x + jitter(rng), 0, static_cast<int>(s.width));
      const double y0 = std::clamp(y + jitter(rng), 0, static_cast<int>(s.height));
      const double x1 = std::clamp(x + w + jitter(rng), static_cast<int>(x0) + 1, static_cast<int>(s.width) + 1);
      const double y1 = std::clamp(y + h + jitter(rng), static_cast<int>(y0) + 1, static_cast<int>(s.height) + 1);
      s.detections.push_back({archive_lens::BoundingBox(x0, y0, std::min(x1, s.width), std::min(y1, s.height)),
                              label, std::round(conf(rng) * 1000.0) / 1000.0, det});
    }
  }
  return s;
}

}  // namespace scenes
