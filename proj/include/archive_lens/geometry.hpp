#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "archive_lens/error.hpp"

namespace archive_lens {

// Axis-aligned box in original-image pixel coordinates, origin top-left.
// Zero-area boxes are valid; negative extents and non-finite coordinates
// are rejected at construction.
class BoundingBox {
 public:
  BoundingBox() = default;

  BoundingBox(double x_min, double y_min, double x_max, double y_max)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
    if (!std::isfinite(x_min) || !std::isfinite(y_min) ||
        !std::isfinite(x_max) || !std::isfinite(y_max)) {
      throw InvalidInput("bounding box coordinates must be finite");
    }
    if (x_min > x_max || y_min > y_max) {
      std::ostringstream os;
      os << "bounding box has negative extent: (" << x_min << ", " << y_min
         << ", " << x_max << ", " << y_max << ")";
      throw InvalidInput(os.str());
    }
  }

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }

  // Intersection with [0, width] x [0, height].
  BoundingBox clipped(double image_width, double image_height) const {
    auto clamp = [](double v, double hi) { return std::clamp(v, 0.0, hi); };
    return BoundingBox(clamp(x_min_, image_width), clamp(y_min_, image_height),
                       clamp(x_max_, image_width), clamp(y_max_, image_height));
  }

  BoundingBox scaled(double factor) const {
    return BoundingBox(x_min_ * factor, y_min_ * factor, x_max_ * factor,
                       y_max_ * factor);
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_min_ = 0.0;
  double y_min_ = 0.0;
  double x_max_ = 0.0;
  double y_max_ = 0.0;
};

// Width/height pair used for anchor clustering. Both strictly positive.
class BoxShape {
 public:
  BoxShape(double width, double height) : width_(width), height_(height) {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) ||
        !std::isfinite(height)) {
      throw InvalidInput("box shape must have positive finite width and height");
    }
  }

  double width() const { return width_; }
  double height() const { return height_; }
  double area() const { return width_ * height_; }

  friend bool operator==(const BoxShape&, const BoxShape&) = default;

 private:
  double width_;
  double height_;
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

// Intersection over union. Two zero-area boxes have union 0 and yield 0.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

// Share of the image covered by the box after clipping it to the frame.
inline double area_fraction(const BoundingBox& box, double image_width,
                            double image_height) {
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw InvalidInput("image dimensions must be positive");
  }
  const BoundingBox c = box.clipped(image_width, image_height);
  return c.area() / (image_width * image_height);
}

// 1 - IoU of two shapes placed on a common center.
inline double shape_distance(const BoxShape& a, const BoxShape& b) {
  const double inter = std::min(a.width(), b.width()) * std::min(a.height(), b.height());
  const double uni = a.area() + b.area() - inter;
  return std::clamp(1.0 - inter / uni, 0.0, 1.0);
}

struct AnchorSet {
  std::vector<BoxShape> centroids;
  // Cluster index per input shape, aligned with the input order.
  std::vector<std::size_t> assignment;
  // Total distance after each assignment step; non-increasing.
  std::vector<double> cost_history;
  std::size_t iterations = 0;

  std::size_t k() const { return centroids.size(); }
  double total_cost() const { return cost_history.empty() ? 0.0 : cost_history.back(); }
};

namespace detail {

inline std::size_t nearest_centroid(const BoxShape& s, std::span<const BoxShape> centroids,
                                    double* dist_out) {
  std::size_t best = 0;
  double best_d = shape_distance(s, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = shape_distance(s, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

inline double assign_all(std::span<const BoxShape> shapes, std::span<const BoxShape> centroids,
                         std::vector<std::size_t>& assignment) {
  double cost = 0.0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    double d = 0.0;
    assignment[i] = nearest_centroid(shapes[i], centroids, &d);
    cost += d;
  }
  return cost;
}

inline double cost_of(std::span<const BoxShape> shapes, std::span<const BoxShape> centroids,
                      std::span<const std::size_t> assignment) {
  double cost = 0.0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    cost += shape_distance(shapes[i], centroids[assignment[i]]);
  }
  return cost;
}

}  // namespace detail

// k-means over box shapes with 1 - IoU as the distance.
//
// Initial centroids are k shapes drawn uniformly (distinct values preferred)
// with the given seed. Each round assigns every shape to its nearest
// centroid, then moves centroids to the component-wise mean of their
// members. An empty cluster is reseeded with the shape farthest from its
// current centroid. Since the mean is not the minimiser of 1 - IoU, an
// update that would raise the total cost is rejected and iteration stops;
// this keeps cost_history non-increasing.
inline AnchorSet anchor_kmeans(std::span<const BoxShape> shapes, std::size_t k,
                               std::uint64_t seed, std::size_t max_iters = 300) {
  if (k == 0) throw InvalidInput("anchor_kmeans: k must be at least 1");
  if (shapes.size() < k) {
    throw InvalidInput("anchor_kmeans: " + std::to_string(shapes.size()) +
                       " shapes cannot form " + std::to_string(k) + " clusters");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(shapes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<BoxShape> centroids;
  centroids.reserve(k);
  std::vector<bool> taken(shapes.size(), false);
  for (std::size_t idx : order) {
    if (centroids.size() == k) break;
    const bool dup = std::find(centroids.begin(), centroids.end(), shapes[idx]) != centroids.end();
    if (!dup) {
      centroids.push_back(shapes[idx]);
      taken[idx] = true;
    }
  }
  // Fewer distinct values than k: fill with duplicates.
  for (std::size_t idx : order) {
    if (centroids.size() == k) break;
    if (!taken[idx]) centroids.push_back(shapes[idx]);
  }

  AnchorSet out;
  out.assignment.assign(shapes.size(), 0);
  double cost = detail::assign_all(shapes, centroids, out.assignment);
  out.cost_history.push_back(cost);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    std::vector<double> sum_w(k, 0.0), sum_h(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const std::size_t c = out.assignment[i];
      sum_w[c] += shapes[i].width();
      sum_h[c] += shapes[i].height();
      ++count[c];
    }

    std::vector<BoxShape> updated = centroids;
    std::vector<std::size_t> assignment = out.assignment;
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        updated[c] = BoxShape(sum_w[c] / static_cast<double>(count[c]),
                              sum_h[c] / static_cast<double>(count[c]));
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (count[assignment[i]] <= 1) continue;  // do not empty another cluster
        const double d = shape_distance(shapes[i], updated[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      --count[assignment[far]];
      updated[c] = shapes[far];
      assignment[far] = c;
      count[c] = 1;
    }

    if (detail::cost_of(shapes, updated, assignment) > cost) break;

    centroids = std::move(updated);
    std::vector<std::size_t> next(shapes.size());
    const double next_cost = detail::assign_all(shapes, centroids, next);
    ++out.iterations;
    const bool stable = next == out.assignment;
    out.assignment = std::move(next);
    cost = next_cost;
    out.cost_history.push_back(cost);
    if (stable) break;
  }

  out.centroids = std::move(centroids);
  return out;
}

}  // namespace archive_lens
