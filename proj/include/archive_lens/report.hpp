#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "archive_lens/analytics.hpp"
#include "archive_lens/csv.hpp"
#include "archive_lens/framing.hpp"
#include "archive_lens/similarity.hpp"
#include "archive_lens/tsne.hpp"

// CSV and JSON writers for every pipeline output. All writers emit a header
// line, LF endings and numbers with nine significant digits.
namespace archive_lens::report {

inline void write_framing_csv(std::ostream& out, const FramingDistribution& dist) {
  csv::write_row(out, {"photographer_id", "person_photos", "close_up", "medium_shot", "overall_shot"});
  for (const auto& [id, shares] : dist) {
    if (!shares) {
      csv::write_row(out, {id, "0", "", "", ""});
      continue;
    }
    csv::write_row(out, {id, std::to_string(shares->person_photos), csv::number(shares->close_up),
                         csv::number(shares->medium_shot), csv::number(shares->overall_shot)});
  }
}

inline void write_stats_csv(std::ostream& out, const std::vector<PhotographerStats>& stats,
                            const std::vector<std::string>& classes) {
  csv::Row header = {"photographer_id", "photo_count", "objects_per_image", "person_image_ratio",
                     "persons_per_person_image"};
  for (const auto& c : classes) header.push_back(c + "_per_100");
  csv::write_row(out, header);
  for (const auto& s : stats) {
    csv::Row row = {s.photographer_id, std::to_string(s.photo_count), csv::number(s.objects_per_image),
                    csv::number(s.person_image_ratio),
                    s.persons_per_person_image ? csv::number(*s.persons_per_person_image) : ""};
    for (const auto& c : classes) row.push_back(csv::number(s.per_class_per_100_images.at(c)));
    csv::write_row(out, row);
  }
}

inline nlohmann::json stats_to_json(const std::vector<PhotographerStats>& stats) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stats) {
    arr.push_back({{"photographer_id", s.photographer_id},
                   {"photo_count", s.photo_count},
                   {"person_photo_count", s.person_photo_count},
                   {"objects_per_image", s.objects_per_image},
                   {"person_image_ratio", s.person_image_ratio},
                   {"persons_per_person_image",
                    s.persons_per_person_image ? nlohmann::json(*s.persons_per_person_image) : nlohmann::json()},
                   {"per_class_per_100_images", s.per_class_per_100_images}});
  }
  return {{"photographers", arr}};
}

// Rows sorted by photo id.
inline void write_split_csv(std::ostream& out, const std::vector<PhotoRecord>& photos,
                            const SplitAssignment& split) {
  std::map<std::string, const PhotoRecord*> by_id;
  for (const auto& p : photos) by_id[p.photo_id] = &p;
  csv::write_row(out, {"photo_id", "photographer_id", "capture_date", "split"});
  for (const auto& [id, p] : by_id) {
    csv::write_row(out, {id, p->photographer_id, p->capture_date ? to_iso(*p->capture_date) : "",
                         to_string(split.at(id))});
  }
}

inline void write_weights_csv(std::ostream& out, const std::vector<std::string>& class_names,
                              const ClassWeights& w) {
  csv::write_row(out, {"class_index", "class", "count", "weight"});
  for (std::size_t c = 0; c < w.class_count(); ++c) {
    csv::write_row(out, {std::to_string(c), class_names[c], std::to_string(w.counts[c]),
                         csv::number(w.weights[c])});
  }
}

inline void write_distance_matrix_csv(std::ostream& out, const DistanceMatrix& dm) {
  csv::Row header = {"photographer_id"};
  header.insert(header.end(), dm.ids().begin(), dm.ids().end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < dm.size(); ++i) {
    csv::Row row = {dm.ids()[i]};
    for (std::size_t j = 0; j < dm.size(); ++j) row.push_back(csv::number(dm(i, j)));
    csv::write_row(out, row);
  }
}

inline void write_embedding_csv(std::ostream& out, const std::vector<FeatureVector>& features,
                                const Embedding& y) {
  csv::write_row(out, {"photo_id", "photographer_id", "x", "y"});
  for (std::size_t i = 0; i < features.size(); ++i) {
    csv::write_row(out, {features[i].photo_id, features[i].photographer_id, csv::number(y[i][0]),
                         csv::number(y[i][1])});
  }
}

}  // namespace archive_lens::report
