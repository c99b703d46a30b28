#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "archive_lens/fusion.hpp"

namespace archive_lens {

using CalendarDate = std::chrono::year_month_day;

inline std::string to_iso(const CalendarDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

// One archive photograph together with its consensus detections.
struct PhotoRecord {
  std::string photo_id;
  std::string photographer_id;
  std::optional<CalendarDate> capture_date;
  double image_width = 0.0;
  double image_height = 0.0;
  std::vector<FusedDetection> fused_detections;
};

inline constexpr const char* kPersonClass = "person";

}  // namespace archive_lens
