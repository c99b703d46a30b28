#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "archive_lens/error.hpp"

namespace archive_lens {

struct EmbeddingConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::uint64_t seed = 0;
  // Entropy tolerance (nats) of the per-point bandwidth search.
  double entropy_tolerance = 1e-4;
  // KL divergence is recorded every this many iterations (0 disables).
  std::size_t kl_every = 50;

  void validate(std::size_t points) const {
    if (points < 4) throw InvalidInput("t-SNE needs at least 4 points");
    if (!(perplexity > 0.0) || !(learning_rate > 0.0) || !(early_exaggeration > 0.0) ||
        iterations == 0) {
      throw InvalidInput("t-SNE hyperparameters must be positive");
    }
    if (!(perplexity < (static_cast<double>(points) - 1.0) / 3.0)) {
      throw InvalidInput("perplexity " + std::to_string(perplexity) + " too large for " +
                         std::to_string(points) + " points (must be < (N - 1) / 3)");
    }
  }
};

using Embedding = std::vector<std::array<double, 2>>;

struct KlSample {
  std::size_t iteration;
  double divergence;
};

struct TsneResult {
  Embedding coordinates;
  std::vector<KlSample> kl_trace;
};

namespace detail {

inline std::vector<double> squared_distances(const std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x[i].size(); ++k) {
        const double t = x[i][k] - x[j][k];
        s += t * t;
      }
      d[i * n + j] = d[j * n + i] = s;
    }
  }
  return d;
}

// Row i of the conditional Gaussian affinities p_{j|i}, with precision
// chosen by bisection so that the row entropy equals log(perplexity).
inline void conditional_row(const std::vector<double>& dist, std::size_t n, std::size_t i,
                            double target_entropy, double tol, double* row) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, dist[i * n + j]);
  }
  double beta = 1.0;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 200; ++step) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        row[j] = 0.0;
        continue;
      }
      const double shifted = dist[i * n + j] - dmin;
      row[j] = std::exp(-beta * shifted);
      sum += row[j];
      weighted += shifted * row[j];
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    const double diff = entropy - target_entropy;
    if (std::abs(diff) < tol) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
}

}  // namespace detail

// Symmetrised joint affinities P (row-major N x N), floored at 1e-12.
inline std::vector<double> joint_affinities(const std::vector<std::vector<double>>& x,
                                            double perplexity, double tol = 1e-4) {
  const std::size_t n = x.size();
  const auto dist = detail::squared_distances(x);
  std::vector<double> cond(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    detail::conditional_row(dist, n, i, std::log(perplexity), tol, &cond[i * n]);
  }
  std::vector<double> p(n * n, 0.0);
  const double norm = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p[i * n + j] = std::max((cond[i * n + j] + cond[j * n + i]) / norm, 1e-12);
    }
  }
  return p;
}

// KL(P || Q) for an embedding, with Student-t (one degree of freedom) Q.
inline double kl_divergence(const std::vector<double>& p, const Embedding& y) {
  const std::size_t n = y.size();
  std::vector<double> num(n * n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = num[j * n + i] = v;
      sum += 2.0 * v;
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = std::max(num[i * n + j] / sum, 1e-12);
      const double pij = p[i * n + j];
      kl += pij * std::log(pij / q);
    }
  }
  return kl;
}

// Exact O(N^2) t-SNE into two dimensions.
//
// Gradient descent with momentum and per-coordinate adaptive gains; P is
// multiplied by the early exaggeration factor during the first
// exaggeration_iterations, which also use the initial momentum. The
// initial layout is N(0, 1e-4^2) from a generator seeded by config.seed, so
// equal inputs and seed give bit-identical output.
inline TsneResult tsne_embed(const std::vector<std::vector<double>>& x,
                             const EmbeddingConfig& config = {}) {
  const std::size_t n = x.size();
  config.validate(n);
  for (const auto& row : x) {
    if (row.size() != x.front().size()) throw InvalidInput("t-SNE input rows differ in length");
    for (double v : row) {
      if (!std::isfinite(v)) throw InvalidInput("t-SNE input must be finite");
    }
  }

  const auto p = joint_affinities(x, config.perplexity, config.entropy_tolerance);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  Embedding y(n);
  for (auto& pt : y) {
    pt[0] = init(rng);
    pt[1] = init(rng);
  }
  Embedding update(n, {0.0, 0.0});
  Embedding gains(n, {1.0, 1.0});
  std::vector<double> num(n * n, 0.0);
  Embedding grad(n);

  TsneResult result;
  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    const bool early = iter < config.exaggeration_iterations;
    const double exaggeration = early ? config.early_exaggeration : 1.0;
    const double momentum = early ? config.initial_momentum : config.final_momentum;

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = v;
        sum += 2.0 * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = num[i * n + j];
        const double q = std::max(v / sum, 1e-12);
        const double mult = (exaggeration * p[i * n + j] - q) * v;
        gx += mult * (y[i][0] - y[j][0]);
        gy += mult * (y[i][1] - y[j][1]);
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_sign = (grad[i][d] > 0.0) == (update[i][d] > 0.0);
        gains[i][d] = same_sign ? gains[i][d] * 0.8 : gains[i][d] + 0.2;
        gains[i][d] = std::max(gains[i][d], 0.01);
        update[i][d] = momentum * update[i][d] - config.learning_rate * gains[i][d] * grad[i][d];
        y[i][d] += update[i][d];
      }
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& pt : y) {
      cx += pt[0];
      cy += pt[1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (auto& pt : y) {
      pt[0] -= cx;
      pt[1] -= cy;
    }

    if (config.kl_every > 0 && (iter + 1) % config.kl_every == 0) {
      result.kl_trace.push_back({iter + 1, kl_divergence(p, y)});
    }
  }
  result.coordinates = std::move(y);
  return result;
}

}  // namespace archive_lens
