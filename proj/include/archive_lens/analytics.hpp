#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "archive_lens/error.hpp"
#include "archive_lens/photo.hpp"

namespace archive_lens {

// ---------------------------------------------------------------------------
// Content statistics
// ---------------------------------------------------------------------------

// Default classes of interest for content statistics.
inline const std::vector<std::string>& default_classes_of_interest() {
  static const std::vector<std::string> classes = {
      "person", "airplane", "boat", "train", "car", "bicycle",
      "skis",   "dog",      "horse", "chair", "tie"};
  return classes;
}

struct PhotographerStats {
  std::string photographer_id;
  std::size_t photo_count = 0;
  std::size_t person_photo_count = 0;
  double objects_per_image = 0.0;
  double person_image_ratio = 0.0;
  // Undefined when the photographer has no photo with a person.
  std::optional<double> persons_per_person_image;
  std::map<std::string, double> per_class_per_100_images;
};

// One row per photographer, ordered by photographer id.
inline std::vector<PhotographerStats> content_stats(const std::vector<PhotoRecord>& photos,
                                                    const std::vector<std::string>& classes) {
  if (classes.empty()) throw InvalidInput("content_stats: no classes of interest given");
  const std::set<std::string> wanted(classes.begin(), classes.end());

  struct Acc {
    std::size_t photos = 0;
    std::size_t person_photos = 0;
    std::size_t persons = 0;
    std::size_t objects = 0;
    std::map<std::string, std::size_t> per_class;
  };
  std::map<std::string, Acc> acc;
  for (const auto& p : photos) {
    Acc& a = acc[p.photographer_id];
    ++a.photos;
    std::size_t persons = 0;
    for (const auto& d : p.fused_detections) {
      if (d.class_label == kPersonClass) ++persons;
      if (wanted.count(d.class_label)) {
        ++a.objects;
        ++a.per_class[d.class_label];
      }
    }
    if (persons > 0) {
      ++a.person_photos;
      a.persons += persons;
    }
  }

  std::vector<PhotographerStats> out;
  out.reserve(acc.size());
  for (const auto& [id, a] : acc) {
    PhotographerStats s;
    s.photographer_id = id;
    s.photo_count = a.photos;
    s.person_photo_count = a.person_photos;
    const double n = static_cast<double>(a.photos);
    s.objects_per_image = static_cast<double>(a.objects) / n;
    s.person_image_ratio = static_cast<double>(a.person_photos) / n;
    if (a.person_photos > 0) {
      s.persons_per_person_image =
          static_cast<double>(a.persons) / static_cast<double>(a.person_photos);
    }
    for (const auto& c : wanted) {
      auto it = a.per_class.find(c);
      const double count = it == a.per_class.end() ? 0.0 : static_cast<double>(it->second);
      s.per_class_per_100_images[c] = 100.0 * count / n;
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grouped dataset split
// ---------------------------------------------------------------------------

enum class Split { Train = 0, Validation = 1, Test = 2 };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;

  std::array<double, 3> as_array() const { return {train, validation, test}; }

  void validate() const {
    if (!(train > 0.0 && validation > 0.0 && test > 0.0)) {
      throw InvalidInput("split fractions must be positive");
    }
    if (std::abs(train + validation + test - 1.0) > 1e-9) {
      throw InvalidInput("split fractions must sum to 1");
    }
  }
};

using SplitAssignment = std::map<std::string, Split>;

// A set of photos that must land in the same split.
struct SplitGroup {
  std::string photographer_id;
  std::vector<std::size_t> members;  // indices into the photo list
};

// Photos of one photographer on one day form a group; undated photos are
// singletons. Groups are returned sorted by (photographer, first photo id).
inline std::vector<SplitGroup> split_groups(const std::vector<PhotoRecord>& photos) {
  std::map<std::tuple<std::string, int, unsigned, unsigned>, SplitGroup> dated;
  std::vector<SplitGroup> groups;
  for (std::size_t i = 0; i < photos.size(); ++i) {
    const auto& p = photos[i];
    if (!p.capture_date) {
      groups.push_back({p.photographer_id, {i}});
      continue;
    }
    const auto& d = *p.capture_date;
    auto key = std::make_tuple(p.photographer_id, static_cast<int>(d.year()),
                               static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    auto& g = dated[key];
    g.photographer_id = p.photographer_id;
    g.members.push_back(i);
  }
  for (auto& [key, g] : dated) groups.push_back(std::move(g));
  for (auto& g : groups) {
    std::sort(g.members.begin(), g.members.end(), [&](std::size_t a, std::size_t b) {
      return photos[a].photo_id < photos[b].photo_id;
    });
  }
  std::sort(groups.begin(), groups.end(), [&](const SplitGroup& a, const SplitGroup& b) {
    return std::tie(a.photographer_id, photos[a.members.front()].photo_id) <
           std::tie(b.photographer_id, photos[b.members.front()].photo_id);
  });
  return groups;
}

// Assigns whole groups to train/validation/test.
//
// Photographers are processed independently. Within one, groups are shuffled
// with the seed (to randomise ties) and then visited largest first; each goes
// to the split whose photo count is furthest below its target for that
// photographer. Ties are broken by the archive-wide shortfall, then by split
// order.
inline SplitAssignment split_dataset(const std::vector<PhotoRecord>& photos,
                                     const SplitFractions& fractions, std::uint64_t seed) {
  fractions.validate();
  const auto target = fractions.as_array();

  std::set<std::string> seen;
  for (const auto& p : photos) {
    if (!seen.insert(p.photo_id).second) {
      throw InvalidInput("split_dataset: duplicate photo id '" + p.photo_id + "'");
    }
  }

  auto groups = split_groups(photos);
  std::map<std::string, std::vector<std::size_t>> by_photographer;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    by_photographer[groups[g].photographer_id].push_back(g);
  }

  std::mt19937_64 rng(seed);
  const double total = static_cast<double>(photos.size());
  std::array<double, 3> global_filled{0, 0, 0};
  SplitAssignment out;
  constexpr double kTie = 1e-9;

  for (auto& [pid, gids] : by_photographer) {
    std::shuffle(gids.begin(), gids.end(), rng);
    std::stable_sort(gids.begin(), gids.end(), [&](std::size_t a, std::size_t b) {
      return groups[a].members.size() > groups[b].members.size();
    });
    double n = 0.0;
    for (auto g : gids) n += static_cast<double>(groups[g].members.size());

    std::array<double, 3> filled{0, 0, 0};
    for (auto g : gids) {
      std::size_t best = 0;
      double best_local = target[0] * n - filled[0];
      double best_global = target[0] * total - global_filled[0];
      for (std::size_t s = 1; s < 3; ++s) {
        const double local = target[s] * n - filled[s];
        const double global = target[s] * total - global_filled[s];
        if (local > best_local + kTie ||
            (std::abs(local - best_local) <= kTie && global > best_global + kTie)) {
          best = s;
          best_local = local;
          best_global = global;
        }
      }
      const double size = static_cast<double>(groups[g].members.size());
      filled[best] += size;
      global_filled[best] += size;
      for (auto idx : groups[g].members) out[photos[idx].photo_id] = static_cast<Split>(best);
    }
  }
  return out;
}

// Chronological variant: per photographer, day groups are laid out in date
// order (undated photos last) and each group goes to the split whose
// cumulative target range contains the group's midpoint.
inline SplitAssignment split_dataset_by_date(const std::vector<PhotoRecord>& photos,
                                             const SplitFractions& fractions) {
  fractions.validate();
  const auto target = fractions.as_array();
  auto groups = split_groups(photos);
  std::map<std::string, std::vector<std::size_t>> by_photographer;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    by_photographer[groups[g].photographer_id].push_back(g);
  }
  auto date_key = [&](std::size_t g) {
    const auto& p = photos[groups[g].members.front()];
    return std::make_tuple(!p.capture_date.has_value(),
                           p.capture_date ? p.capture_date->year() : std::chrono::year{0},
                           p.capture_date ? p.capture_date->month() : std::chrono::month{0},
                           p.capture_date ? p.capture_date->day() : std::chrono::day{0},
                           p.photo_id);
  };
  SplitAssignment out;
  for (auto& [pid, gids] : by_photographer) {
    std::sort(gids.begin(), gids.end(),
              [&](std::size_t a, std::size_t b) { return date_key(a) < date_key(b); });
    double n = 0.0;
    for (auto g : gids) n += static_cast<double>(groups[g].members.size());
    double cum = 0.0;
    for (auto g : gids) {
      const double size = static_cast<double>(groups[g].members.size());
      const double mid = cum + 0.5 * size;
      std::size_t s = 0;
      double bound = target[0] * n;
      while (s < 2 && mid >= bound) bound += target[++s] * n;
      for (auto idx : groups[g].members) out[photos[idx].photo_id] = static_cast<Split>(s);
      cum += size;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class weights and weighted cross-entropy
// ---------------------------------------------------------------------------

// Non-negative rational number in lowest terms.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

// Inverse-frequency weights w_c = N / (N_c * C), indexed by class. `exact`
// holds the same weights as reduced fractions; `weights` rounds them once.
struct ClassWeights {
  std::vector<double> weights;
  std::vector<Fraction> exact;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t class_count() const { return weights.size(); }
};

inline ClassWeights class_weights(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw InvalidInput("class_weights: no classes");
  ClassWeights w;
  w.counts.assign(counts.begin(), counts.end());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw InvalidInput("class_weights: class " + std::to_string(c) +
                         " has no samples, weight undefined");
    }
    w.total += counts[c];
  }
  const std::uint64_t classes = counts.size();
  w.weights.reserve(counts.size());
  w.exact.reserve(counts.size());
  for (auto nc : counts) {
    std::uint64_t den = 0;
    if (__builtin_mul_overflow(nc, classes, &den)) {
      throw InvalidInput("class_weights: count " + std::to_string(nc) + " too large");
    }
    const std::uint64_t g = std::gcd(w.total, den);
    w.exact.push_back({w.total / g, den / g});
    w.weights.push_back(static_cast<double>(w.total) /
                        (static_cast<double>(nc) * static_cast<double>(classes)));
  }
  return w;
}

inline constexpr double kProbabilityFloor = 1e-12;

// Mean over samples of -w[y_i] * log p_i[y_i], with p clamped to [1e-12, 1].
inline double weighted_cross_entropy(const std::vector<std::vector<double>>& predicted,
                                     std::span<const std::size_t> labels,
                                     std::span<const double> weights) {
  if (predicted.size() != labels.size()) {
    throw InvalidInput("weighted_cross_entropy: " + std::to_string(predicted.size()) +
                       " predictions for " + std::to_string(labels.size()) + " labels");
  }
  if (predicted.empty()) throw InvalidInput("weighted_cross_entropy: no samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& p = predicted[i];
    if (labels[i] >= p.size() || labels[i] >= weights.size()) {
      throw InvalidInput("weighted_cross_entropy: label " + std::to_string(labels[i]) +
                         " out of range at sample " + std::to_string(i));
    }
    const double mass = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(mass - 1.0) > 1e-6) {
      throw InvalidInput("weighted_cross_entropy: probabilities of sample " + std::to_string(i) +
                         " do not sum to 1");
    }
    const double q = std::clamp(p[labels[i]], kProbabilityFloor, 1.0);
    sum += -weights[labels[i]] * std::log(q);
  }
  return sum / static_cast<double>(predicted.size());
}

inline double weighted_cross_entropy(const std::vector<std::vector<double>>& predicted,
                                     std::span<const std::size_t> labels,
                                     const ClassWeights& weights) {
  return weighted_cross_entropy(predicted, labels, std::span<const double>(weights.weights));
}

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

// Square count matrix; row = true class, column = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major)
      : n_(classes), counts_(std::move(row_major)) {
    if (counts_.size() != n_ * n_) {
      throw InvalidInput("confusion matrix needs " + std::to_string(n_ * n_) + " entries");
    }
  }

  std::size_t size() const { return n_; }
  std::uint64_t operator()(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * n_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1) {
    if (truth >= n_ || predicted >= n_) throw InvalidInput("confusion matrix index out of range");
    counts_[truth * n_ + predicted] += count;
  }
  std::uint64_t row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(truth, j);
    return s;
  }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

struct ConfusionSummary {
  std::vector<std::optional<double>> per_class_accuracy;  // nullopt for empty rows
  double overall_accuracy = 0.0;
};

inline ConfusionSummary confusion_stats(const ConfusionMatrix& m) {
  ConfusionSummary s;
  std::uint64_t trace = 0, total = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto row = m.row_sum(i);
    trace += m(i, i);
    total += row;
    if (row == 0) {
      s.per_class_accuracy.emplace_back(std::nullopt);
    } else {
      s.per_class_accuracy.emplace_back(static_cast<double>(m(i, i)) / static_cast<double>(row));
    }
  }
  if (total == 0) throw InvalidInput("confusion_stats: matrix has no counts");
  s.overall_accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return s;
}

}  // namespace archive_lens
