#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "archive_lens/error.hpp"
#include "archive_lens/parallel.hpp"
#include "archive_lens/transport.hpp"

namespace archive_lens {

struct FeatureVector {
  std::string photo_id;
  std::string photographer_id;
  std::vector<double> values;
};

// Weighted point set standing in for a distribution. Points are stored
// row-major in one buffer.
class Signature {
 public:
  Signature(std::size_t dim, std::vector<double> coords, std::vector<double> weights)
      : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
    if (dim_ == 0) throw InvalidInput("signature dimension must be positive");
    if (weights_.empty()) throw InvalidInput("signature needs at least one point");
    if (coords_.size() != dim_ * weights_.size()) {
      throw InvalidInput("signature has " + std::to_string(coords_.size()) +
                         " coordinates for " + std::to_string(weights_.size()) +
                         " points of dimension " + std::to_string(dim_));
    }
    for (double c : coords_) {
      if (!std::isfinite(c)) throw InvalidInput("signature coordinates must be finite");
    }
    double total = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("signature weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidInput("signature weights sum to " + std::to_string(total) + ", expected 1");
    }
  }

  // Equal weight 1/m on each of the given points.
  static Signature uniform(std::size_t dim, std::vector<double> coords) {
    if (dim == 0 || coords.size() % dim != 0) {
      throw InvalidInput("uniform signature: coordinate count is not a multiple of dimension");
    }
    const std::size_t m = coords.size() / dim;
    return Signature(dim, std::move(coords),
                     std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  std::span<const double> weights() const { return weights_; }

  // Same points shifted by `offset` and scaled by `factor` (x -> factor * x + offset).
  Signature transformed(double factor, std::span<const double> offset) const {
    std::vector<double> c = coords_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = factor * c[i] + offset[i % dim_];
    return Signature(dim_, std::move(c), weights_);
  }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline CostMatrix ground_distances(const Signature& p, const Signature& q) {
  CostMatrix c(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) c(i, j) = euclidean(p.point(i), q.point(j));
  }
  return c;
}

struct EmdResult {
  double distance = 0.0;
  FlowSolution flow;
};

// Earth Mover's Distance with Euclidean ground distance:
// sum(f_ij * d_ij) / sum(f_ij) at the optimal flow.
inline EmdResult emd(const Signature& p, const Signature& q) {
  if (p.dim() != q.dim()) {
    throw InvalidInput("emd: dimension mismatch (" + std::to_string(p.dim()) + " vs " +
                       std::to_string(q.dim()) + ")");
  }
  const CostMatrix cost = ground_distances(p, q);
  EmdResult r;
  r.flow = solve_transportation(cost, p.weights(), q.weights());
  const double mass = r.flow.total_flow();
  r.distance = mass > 0.0 ? std::max(0.0, r.flow.total_cost / mass) : 0.0;
  return r;
}

// Symmetric matrix of pairwise distances with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::vector<std::string> ids)
      : ids_(std::move(ids)), values_(ids_.size() * ids_.size(), 0.0) {}

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    values_[i * ids_.size() + j] = v;
    values_[j * ids_.size() + i] = v;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
};

inline constexpr std::size_t kDefaultSignatureCap = 256;

// Uniform-weight signature per photographer (ordered by id). Photographers
// with more than `cap` features are subsampled without replacement using a
// generator seeded from `seed`.
inline std::map<std::string, Signature> photographer_signatures(
    const std::vector<FeatureVector>& features, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw InvalidInput("signature cap must be positive");
  if (features.empty()) return {};
  const std::size_t dim = features.front().values.size();
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != dim) {
      throw InvalidInput("feature vector '" + features[i].photo_id + "' has dimension " +
                         std::to_string(features[i].values.size()) + ", expected " +
                         std::to_string(dim));
    }
    members[features[i].photographer_id].push_back(i);
  }

  std::mt19937_64 rng(seed);
  std::map<std::string, Signature> out;
  for (auto& [id, idx] : members) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return features[a].photo_id < features[b].photo_id;
    });
    if (idx.size() > cap) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(cap);
      std::sort(idx.begin(), idx.end());
    }
    std::vector<double> coords;
    coords.reserve(idx.size() * dim);
    for (auto i : idx) coords.insert(coords.end(), features[i].values.begin(), features[i].values.end());
    out.emplace(id, Signature::uniform(dim, std::move(coords)));
  }
  return out;
}

// Pairwise EMD between photographers; each unordered pair is solved once.
inline DistanceMatrix photographer_distance_matrix(const std::vector<FeatureVector>& features,
                                                   std::size_t signature_cap = kDefaultSignatureCap,
                                                   std::uint64_t seed = 0,
                                                   std::size_t workers = worker_count()) {
  const auto sigs = photographer_signatures(features, signature_cap, seed);
  std::vector<std::string> ids;
  std::vector<const Signature*> ordered;
  for (const auto& [id, s] : sigs) {
    ids.push_back(id);
    ordered.push_back(&s);
  }
  DistanceMatrix dm(ids);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  parallel_for(
      pairs.size(),
      [&](std::size_t k) {
        values[k] = emd(*ordered[pairs[k].first], *ordered[pairs[k].second]).distance;
      },
      workers);
  for (std::size_t k = 0; k < pairs.size(); ++k) dm.set(pairs[k].first, pairs[k].second, values[k]);
  return dm;
}

}  // namespace archive_lens
