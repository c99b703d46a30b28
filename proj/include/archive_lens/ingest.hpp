#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "archive_lens/csv.hpp"
#include "archive_lens/error.hpp"
#include "archive_lens/fusion.hpp"
#include "archive_lens/photo.hpp"
#include "archive_lens/similarity.hpp"

namespace archive_lens {

// A recoverable problem with one input row; the row is skipped.
struct RowError {
  std::string source;
  std::size_t line = 0;  // 1-based, 0 when not line-addressable
  std::string message;
};

inline std::string describe(const RowError& e) {
  std::ostringstream os;
  os << e.source;
  if (e.line) os << ':' << e.line;
  os << ": " << e.message;
  return os.str();
}

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& text, const char* what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw InvalidInput(std::string("invalid ") + what + " '" + text + "'");
  }
  return v;
}

// Accepts ISO "1941-06-25", archive style "25 Jun 1941" and "25.6.1941".
// Empty text means the date is absent.
inline std::optional<CalendarDate> parse_date(const std::string& text) {
  using namespace std::chrono;
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;

  int y = 0;
  unsigned m = 0, d = 0;
  char sep1 = 0, sep2 = 0;
  bool parsed = false;
  {
    std::istringstream is(t);
    if (is >> y >> sep1 >> m >> sep2 >> d && sep1 == '-' && sep2 == '-' && is.peek() == EOF) {
      parsed = true;
    }
  }
  if (!parsed) {
    std::istringstream is(t);
    if (is >> d >> sep1 >> m >> sep2 >> y && sep1 == '.' && sep2 == '.' && is.peek() == EOF) {
      parsed = true;
    }
  }
  if (!parsed) {
    static const char* kMonths[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                    "jul", "aug", "sep", "oct", "nov", "dec"};
    std::istringstream is(t);
    std::string mon;
    if (is >> d >> mon >> y && is.peek() == EOF && mon.size() >= 3) {
      std::string key = mon.substr(0, 3);
      std::transform(key.begin(), key.end(), key.begin(), ::tolower);
      for (unsigned i = 0; i < 12; ++i) {
        if (key == kMonths[i]) {
          m = i + 1;
          parsed = true;
        }
      }
    }
  }
  const CalendarDate date{year{y}, month{m}, day{d}};
  if (!parsed || !date.ok()) throw InvalidInput("malformed date '" + text + "'");
  return date;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string photo_id;
  std::string photographer_id;
  std::optional<CalendarDate> capture_date;
  std::string image_path;
  double width = 0.0;
  double height = 0.0;
};

struct ArchiveManifest {
  std::vector<ManifestEntry> entries;  // sorted by photo_id

  const ManifestEntry* find(const std::string& photo_id) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), photo_id,
                               [](const ManifestEntry& e, const std::string& id) { return e.photo_id < id; });
    return it != entries.end() && it->photo_id == photo_id ? &*it : nullptr;
  }
};

struct ManifestParseResult {
  ArchiveManifest manifest;
  std::vector<RowError> errors;
};

namespace detail {

inline std::map<std::string, std::size_t> header_index(const csv::Row& header) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string h = trim(header[i]);
    if (i == 0 && h.rfind("\xEF\xBB\xBF", 0) == 0) h = h.substr(3);  // UTF-8 BOM
    idx[h] = i;
  }
  return idx;
}

inline std::optional<std::size_t> column(const std::map<std::string, std::size_t>& idx,
                                         std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto it = idx.find(n);
    if (it != idx.end()) return it->second;
  }
  return std::nullopt;
}

}  // namespace detail

// Columns (by header name): photo_id, photographer_id, capture_date,
// image_path, width, height. Rows with missing or malformed fields are
// reported and skipped; duplicate photo ids are a hard error.
inline ManifestParseResult parse_manifest(std::istream& in, const std::string& source = "manifest") {
  ManifestParseResult r;
  csv::Row row;
  if (!csv::read_row(in, row)) return r;
  const auto idx = detail::header_index(row);
  const auto c_id = detail::column(idx, {"photo_id", "id"});
  const auto c_ph = detail::column(idx, {"photographer_id", "photographer"});
  const auto c_date = detail::column(idx, {"capture_date", "date"});
  const auto c_path = detail::column(idx, {"image_path", "path"});
  const auto c_w = detail::column(idx, {"width", "image_width"});
  const auto c_h = detail::column(idx, {"height", "image_height"});
  if (!c_id || !c_ph || !c_w || !c_h) {
    throw InvalidInput(source + ": manifest header must name photo_id, photographer_id, width and height");
  }

  std::map<std::string, std::size_t> seen;
  std::set<std::string> duplicates;
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (csv::is_blank(row)) continue;
    auto field = [&](std::optional<std::size_t> c) -> std::string {
      return c && *c < row.size() ? trim(row[*c]) : std::string();
    };
    try {
      ManifestEntry e;
      e.photo_id = field(c_id);
      e.photographer_id = field(c_ph);
      if (e.photo_id.empty()) throw InvalidInput("missing photo_id");
      if (e.photographer_id.empty()) throw InvalidInput("missing photographer_id");
      e.capture_date = parse_date(field(c_date));
      e.image_path = field(c_path);
      e.width = parse_number(field(c_w), "width");
      e.height = parse_number(field(c_h), "height");
      if (!(e.width > 0.0) || !(e.height > 0.0)) throw InvalidInput("image dimensions must be positive");
      if (seen.count(e.photo_id)) {
        duplicates.insert(e.photo_id);
        continue;
      }
      seen[e.photo_id] = line;
      r.manifest.entries.push_back(std::move(e));
    } catch (const InvalidInput& ex) {
      r.errors.push_back({source, line, ex.what()});
    }
  }
  if (!duplicates.empty()) {
    std::string list;
    for (const auto& d : duplicates) list += (list.empty() ? "" : ", ") + d;
    throw InvalidInput(source + ": duplicate photo ids: " + list);
  }
  std::sort(r.manifest.entries.begin(), r.manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.photo_id < b.photo_id; });
  return r;
}

inline ManifestParseResult parse_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open manifest '" + path + "'");
  return parse_manifest(in, path);
}

// ---------------------------------------------------------------------------
// Detection exports
// ---------------------------------------------------------------------------

// Boxes may overflow the frame by this share of the image side before the
// row is rejected; within it they are clipped.
inline constexpr double kBoxOverflowTolerance = 0.02;

struct DetectionParseResult {
  std::vector<std::string> detector_ids;
  std::map<std::string, std::vector<Detection>> by_photo;
  std::vector<RowError> errors;
  std::size_t accepted = 0;
};

namespace detail {

inline void parse_detector_object(const nlohmann::json& obj, const ArchiveManifest& manifest,
                                  const std::string& source, DetectionParseResult& r) {
  if (!obj.is_object() || !obj.contains("detector_id") || !obj["detector_id"].is_string()) {
    throw InvalidInput(source + ": detection file needs a string 'detector_id'");
  }
  const std::string detector = obj["detector_id"].get<std::string>();
  if (!obj.contains("detections") || !obj["detections"].is_array()) {
    throw InvalidInput(source + ": detection file needs a 'detections' array");
  }
  r.detector_ids.push_back(detector);
  const auto& dets = obj["detections"];
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const auto& row = dets[k];
    const std::string where = source + " [" + detector + " #" + std::to_string(k) + "]";
    try {
      if (!row.is_object()) throw InvalidInput("detection is not an object");
      if (!row.contains("photo_id") || !row["photo_id"].is_string()) throw InvalidInput("missing photo_id");
      if (!row.contains("class") || !row["class"].is_string()) throw InvalidInput("missing class");
      if (!row.contains("confidence") || !row["confidence"].is_number()) throw InvalidInput("missing confidence");
      if (!row.contains("box") || !row["box"].is_array() || row["box"].size() != 4) {
        throw InvalidInput("box must be [x_min, y_min, x_max, y_max]");
      }
      const std::string photo = row["photo_id"].get<std::string>();
      const std::string label = row["class"].get<std::string>();
      if (label.empty()) throw InvalidInput("empty class label");
      const double conf = row["confidence"].get<double>();
      if (!(conf >= 0.0 && conf <= 1.0)) {
        throw InvalidInput("confidence " + std::to_string(conf) + " outside [0, 1]");
      }
      double c[4];
      for (int i = 0; i < 4; ++i) {
        if (!row["box"][i].is_number()) throw InvalidInput("box coordinates must be numbers");
        c[i] = row["box"][i].get<double>();
      }
      const ManifestEntry* entry = manifest.find(photo);
      if (!entry) throw InvalidInput("unknown photo_id '" + photo + "'");
      const BoundingBox raw(c[0], c[1], c[2], c[3]);  // rejects negative extent
      const double tw = kBoxOverflowTolerance * entry->width;
      const double th = kBoxOverflowTolerance * entry->height;
      if (c[0] < -tw || c[2] > entry->width + tw || c[1] < -th || c[3] > entry->height + th) {
        throw InvalidInput("box exceeds image bounds by more than 2%");
      }
      r.by_photo[photo].push_back(Detection{raw.clipped(entry->width, entry->height), label, conf, detector});
      ++r.accepted;
    } catch (const InvalidInput& ex) {
      r.errors.push_back({where, 0, ex.what()});
    } catch (const nlohmann::json::exception& ex) {
      r.errors.push_back({where, 0, ex.what()});
    }
  }
}

}  // namespace detail

// One detector object `{detector_id, detections: [...]}` or an array of them.
// Boxes must already be in original-image pixels.
inline void parse_detections(const nlohmann::json& doc, const ArchiveManifest& manifest,
                             const std::string& source, DetectionParseResult& into) {
  if (doc.is_array()) {
    for (const auto& obj : doc) detail::parse_detector_object(obj, manifest, source, into);
  } else {
    detail::parse_detector_object(doc, manifest, source, into);
  }
}

inline DetectionParseResult parse_detections(const std::string& path, const ArchiveManifest& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open detection file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(path + ": " + ex.what());
  }
  DetectionParseResult r;
  parse_detections(doc, manifest, path, r);
  return r;
}

// ---------------------------------------------------------------------------
// fused.json
// ---------------------------------------------------------------------------

inline nlohmann::json box_to_json(const BoundingBox& b) {
  return nlohmann::json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
}

inline BoundingBox box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw InvalidInput("box must be a 4-element array");
  return BoundingBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

inline nlohmann::json to_json(const FusedDetection& f) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : f.member_detections) {
    members.push_back({{"detector_id", m.detector_id},
                       {"class", m.class_label},
                       {"confidence", m.confidence},
                       {"box", box_to_json(m.box)}});
  }
  return {{"class", f.class_label},
          {"confidence", f.confidence},
          {"box", box_to_json(f.box)},
          {"source_detectors", f.source_detectors},
          {"members", members}};
}

inline FusedDetection fused_from_json(const nlohmann::json& j) {
  FusedDetection f;
  f.class_label = j.at("class").get<std::string>();
  f.confidence = j.at("confidence").get<double>();
  f.box = box_from_json(j.at("box"));
  for (const auto& s : j.at("source_detectors")) f.source_detectors.insert(s.get<std::string>());
  for (const auto& m : j.at("members")) {
    f.member_detections.push_back(Detection{box_from_json(m.at("box")), m.at("class").get<std::string>(),
                                            m.at("confidence").get<double>(),
                                            m.at("detector_id").get<std::string>()});
  }
  return f;
}

inline nlohmann::json to_json(const std::vector<PhotoRecord>& photos) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : photos) {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& f : p.fused_detections) dets.push_back(to_json(f));
    arr.push_back({{"photo_id", p.photo_id},
                   {"photographer_id", p.photographer_id},
                   {"capture_date", p.capture_date ? nlohmann::json(to_iso(*p.capture_date)) : nlohmann::json()},
                   {"width", p.image_width},
                   {"height", p.image_height},
                   {"detections", dets}});
  }
  return {{"photos", arr}};
}

inline std::vector<PhotoRecord> photos_from_json(const nlohmann::json& doc) {
  std::vector<PhotoRecord> photos;
  try {
    for (const auto& p : doc.at("photos")) {
      PhotoRecord r;
      r.photo_id = p.at("photo_id").get<std::string>();
      r.photographer_id = p.at("photographer_id").get<std::string>();
      if (p.contains("capture_date") && p["capture_date"].is_string()) {
        r.capture_date = parse_date(p["capture_date"].get<std::string>());
      }
      r.image_width = p.at("width").get<double>();
      r.image_height = p.at("height").get<double>();
      if (!(r.image_width > 0.0) || !(r.image_height > 0.0)) {
        throw InvalidInput("photo '" + r.photo_id + "' has non-positive dimensions");
      }
      for (const auto& d : p.at("detections")) r.fused_detections.push_back(fused_from_json(d));
      photos.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(std::string("malformed fused file: ") + ex.what());
  }
  return photos;
}

inline std::vector<PhotoRecord> read_fused(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open fused file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(path + ": " + ex.what());
  }
  return photos_from_json(doc);
}

// Photos without any manifest date or detections still appear, so rates
// are computed over the full archive.
inline std::vector<PhotoRecord> photos_from_manifest(const ArchiveManifest& manifest) {
  std::vector<PhotoRecord> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    out.push_back(PhotoRecord{e.photo_id, e.photographer_id, e.capture_date, e.width, e.height, {}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature and label tables
// ---------------------------------------------------------------------------

struct FeatureParseResult {
  std::vector<FeatureVector> features;
  std::size_t dimension = 0;
  std::vector<RowError> errors;
};

// photo_id, photographer_id, then D numeric columns (D from the header).
inline FeatureParseResult parse_features(std::istream& in, const std::string& source = "features") {
  FeatureParseResult r;
  csv::Row row;
  if (!csv::read_row(in, row)) return r;
  if (row.size() < 3) throw InvalidInput(source + ": feature header needs photo_id, photographer_id and values");
  r.dimension = row.size() - 2;
  std::set<std::string> seen;
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (csv::is_blank(row)) continue;
    try {
      if (row.size() != r.dimension + 2) {
        throw InvalidInput("expected " + std::to_string(r.dimension + 2) + " fields, got " +
                           std::to_string(row.size()));
      }
      FeatureVector f;
      f.photo_id = trim(row[0]);
      f.photographer_id = trim(row[1]);
      if (f.photo_id.empty() || f.photographer_id.empty()) throw InvalidInput("missing id");
      if (!seen.insert(f.photo_id).second) throw InvalidInput("duplicate photo_id '" + f.photo_id + "'");
      f.values.reserve(r.dimension);
      for (std::size_t k = 2; k < row.size(); ++k) f.values.push_back(parse_number(row[k], "feature value"));
      r.features.push_back(std::move(f));
    } catch (const InvalidInput& ex) {
      r.errors.push_back({source, line, ex.what()});
    }
  }
  std::sort(r.features.begin(), r.features.end(),
            [](const FeatureVector& a, const FeatureVector& b) { return a.photo_id < b.photo_id; });
  return r;
}

inline FeatureParseResult parse_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open feature file '" + path + "'");
  return parse_features(in, path);
}

struct LabelParseResult {
  std::vector<std::string> labels;
  std::vector<RowError> errors;
};

// Any CSV with a `label` column (other columns ignored).
inline LabelParseResult parse_labels(std::istream& in, const std::string& source = "labels") {
  LabelParseResult r;
  csv::Row row;
  if (!csv::read_row(in, row)) return r;
  const auto idx = detail::header_index(row);
  const auto c = detail::column(idx, {"label", "class", "photographer_id"});
  if (!c) throw InvalidInput(source + ": label file needs a 'label' column");
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (csv::is_blank(row)) continue;
    const std::string v = *c < row.size() ? trim(row[*c]) : std::string();
    if (v.empty()) {
      r.errors.push_back({source, line, "missing label"});
      continue;
    }
    r.labels.push_back(v);
  }
  return r;
}

inline LabelParseResult parse_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open label file '" + path + "'");
  return parse_labels(in, path);
}

}  // namespace archive_lens
