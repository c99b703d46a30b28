#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "archive_lens/error.hpp"

namespace archive_lens {

// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double max_value() const {
    return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct BasicCell {
  std::size_t row;
  std::size_t col;
  double flow;
};

struct FlowSolution {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> flows;  // row-major rows x cols
  double total_cost = 0.0;
  // Dual potentials; reduced cost c_ij - u_i - v_j is >= 0 at optimum and
  // zero on every basic cell.
  std::vector<double> row_potentials;
  std::vector<double> col_potentials;
  std::vector<BasicCell> basis;  // spanning tree, rows + cols - 1 cells
  std::size_t pivots = 0;
  bool used_bland_rule = false;

  double flow(std::size_t i, std::size_t j) const { return flows[i * cols + j]; }
  double total_flow() const { return std::accumulate(flows.begin(), flows.end(), 0.0); }
};

struct CertificateReport {
  bool ok = true;
  double max_marginal_error = 0.0;
  double min_reduced_cost = 0.0;
  double max_slackness_violation = 0.0;  // |reduced cost| on cells carrying flow
  double duality_gap = 0.0;
  std::string failure;
};

// Checks primal feasibility, dual feasibility and complementary slackness of
// a solution; together these prove optimality.
inline CertificateReport certify_optimality(const CostMatrix& cost, std::span<const double> supply,
                                            std::span<const double> demand,
                                            const FlowSolution& sol, double tol = 1e-9) {
  CertificateReport r;
  const std::size_t m = cost.rows(), n = cost.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (sol.flow(i, j) < 0.0) {
        r.ok = false;
        r.failure = "negative flow";
      }
      s += sol.flow(i, j);
    }
    r.max_marginal_error = std::max(r.max_marginal_error, std::abs(s - supply[i]));
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += sol.flow(i, j);
    r.max_marginal_error = std::max(r.max_marginal_error, std::abs(s - demand[j]));
  }
  r.min_reduced_cost = std::numeric_limits<double>::infinity();
  double dual = 0.0;
  for (std::size_t i = 0; i < m; ++i) dual += supply[i] * sol.row_potentials[i];
  for (std::size_t j = 0; j < n; ++j) dual += demand[j] * sol.col_potentials[j];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double rc = cost(i, j) - sol.row_potentials[i] - sol.col_potentials[j];
      r.min_reduced_cost = std::min(r.min_reduced_cost, rc);
      if (sol.flow(i, j) > tol) {
        r.max_slackness_violation = std::max(r.max_slackness_violation, std::abs(rc));
      }
    }
  }
  r.duality_gap = std::abs(sol.total_cost - dual);
  if (r.max_marginal_error > tol) {
    r.ok = false;
    r.failure = "marginals do not match weights";
  } else if (r.min_reduced_cost < -tol) {
    r.ok = false;
    r.failure = "negative reduced cost";
  } else if (r.max_slackness_violation > tol) {
    r.ok = false;
    r.failure = "complementary slackness violated";
  } else if (r.duality_gap > tol) {
    r.ok = false;
    r.failure = "primal and dual objectives differ";
  }
  return r;
}

namespace detail {

// Transportation simplex on a balanced problem. The basis is kept as a
// spanning tree over the m row nodes and n column nodes.
class TransportationSimplex {
 public:
  TransportationSimplex(const CostMatrix& cost, std::span<const double> supply,
                        std::span<const double> demand)
      : cost_(cost), supply_(supply), demand_(demand), m_(cost.rows()), n_(cost.cols()),
        tol_(1e-12 * std::max(1.0, cost.max_value())) {}

  FlowSolution solve(std::size_t max_pivots) {
    vogel_initial_basis();
    std::size_t degenerate_streak = 0;
    const std::size_t bland_after = 10 * (m_ + n_);
    FlowSolution sol;

    while (true) {
      compute_potentials();
      const auto entering = bland_ ? first_negative() : most_negative();
      if (!entering) break;
      if (sol.pivots >= max_pivots) {
        throw InternalError("transportation simplex did not converge after " +
                            std::to_string(sol.pivots) + " pivots");
      }
      const double theta = pivot(entering->first, entering->second);
      ++sol.pivots;
      degenerate_streak = theta <= kDegenerateFlow ? degenerate_streak + 1 : 0;
      if (!bland_ && degenerate_streak > bland_after) bland_ = true;
    }

    sol.rows = m_;
    sol.cols = n_;
    sol.flows.assign(m_ * n_, 0.0);
    sol.total_cost = 0.0;
    for (const auto& c : basis_) {
      sol.flows[c.row * n_ + c.col] = c.flow;
      sol.total_cost += c.flow * cost_(c.row, c.col);
    }
    sol.row_potentials = u_;
    sol.col_potentials = v_;
    sol.basis = basis_;
    sol.used_bland_rule = bland_;
    return sol;
  }

 private:
  static constexpr double kDegenerateFlow = 1e-15;

  void vogel_initial_basis() {
    std::vector<double> s(supply_.begin(), supply_.end());
    std::vector<double> d(demand_.begin(), demand_.end());
    std::vector<bool> row_on(m_, true), col_on(n_, true);
    std::size_t rows_left = m_, cols_left = n_;
    basis_.clear();
    basis_.reserve(m_ + n_ - 1);

    // Smallest and second-smallest cost along an active line; penalty is
    // their difference (or the smallest when only one cell is active).
    auto row_scan = [&](std::size_t i, double& penalty, std::size_t& arg) {
      double a = std::numeric_limits<double>::infinity(), b = a;
      arg = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (!col_on[j]) continue;
        const double c = cost_(i, j);
        if (c < a) {
          b = a;
          a = c;
          arg = j;
        } else if (c < b) {
          b = c;
        }
      }
      penalty = std::isinf(b) ? a : b - a;
    };
    auto col_scan = [&](std::size_t j, double& penalty, std::size_t& arg) {
      double a = std::numeric_limits<double>::infinity(), b = a;
      arg = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!row_on[i]) continue;
        const double c = cost_(i, j);
        if (c < a) {
          b = a;
          a = c;
          arg = i;
        } else if (c < b) {
          b = c;
        }
      }
      penalty = std::isinf(b) ? a : b - a;
    };

    while (rows_left > 0 && cols_left > 0) {
      double best_pen = -1.0;
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!row_on[i]) continue;
        double p;
        std::size_t j;
        row_scan(i, p, j);
        if (p > best_pen) {
          best_pen = p;
          bi = i;
          bj = j;
        }
      }
      for (std::size_t j = 0; j < n_; ++j) {
        if (!col_on[j]) continue;
        double p;
        std::size_t i;
        col_scan(j, p, i);
        if (p > best_pen) {
          best_pen = p;
          bi = i;
          bj = j;
        }
      }

      if (rows_left == 1 && cols_left == 1) {
        basis_.push_back({bi, bj, std::max(0.0, std::min(s[bi], d[bj]))});
        break;
      }
      const double x = std::max(0.0, std::min(s[bi], d[bj]));
      basis_.push_back({bi, bj, x});
      s[bi] -= x;
      d[bj] -= x;
      // Exactly one line leaves per step so the basis ends as a spanning tree.
      const bool drop_row = rows_left > 1 && (cols_left == 1 || s[bi] <= d[bj]);
      if (drop_row) {
        row_on[bi] = false;
        --rows_left;
      } else {
        col_on[bj] = false;
        --cols_left;
      }
    }
    if (basis_.size() != m_ + n_ - 1) {
      throw InternalError("initial basis has " + std::to_string(basis_.size()) + " cells, expected " +
                          std::to_string(m_ + n_ - 1));
    }
  }

  void build_adjacency() {
    adj_.assign(m_ + n_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj_[basis_[k].row].push_back(k);
      adj_[m_ + basis_[k].col].push_back(k);
    }
  }

  void compute_potentials() {
    build_adjacency();
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<bool> done(m_ + n_, false);
    std::vector<std::size_t> stack{0};
    done[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[node]) {
        const auto& c = basis_[k];
        const std::size_t other = node < m_ ? m_ + c.col : c.row;
        if (done[other]) continue;
        if (node < m_) {
          v_[c.col] = cost_(c.row, c.col) - u_[c.row];
        } else {
          u_[c.row] = cost_(c.row, c.col) - v_[c.col];
        }
        done[other] = true;
        ++reached;
        stack.push_back(other);
      }
    }
    if (reached != m_ + n_) throw InternalError("transportation basis is not a spanning tree");
    is_basic_.assign(m_ * n_, false);
    for (const auto& c : basis_) is_basic_[c.row * n_ + c.col] = true;
  }

  double reduced_cost(std::size_t i, std::size_t j) const {
    return cost_(i, j) - u_[i] - v_[j];
  }

  std::optional<std::pair<std::size_t, std::size_t>> most_negative() const {
    double best = -tol_;
    std::optional<std::pair<std::size_t, std::size_t>> arg;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[i * n_ + j]) continue;
        const double r = reduced_cost(i, j);
        if (r < best) {
          best = r;
          arg = {i, j};
        }
      }
    }
    return arg;
  }

  std::optional<std::pair<std::size_t, std::size_t>> first_negative() const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (!is_basic_[i * n_ + j] && reduced_cost(i, j) < -tol_) return std::pair{i, j};
      }
    }
    return std::nullopt;
  }

  // Brings (row, col) into the basis; returns the flow shifted around the cycle.
  double pivot(std::size_t row, std::size_t col) {
    // Tree path from the entering row node to the entering column node.
    const std::size_t start = row, goal = m_ + col;
    std::vector<std::size_t> parent_edge(m_ + n_, kNone);
    std::vector<bool> seen(m_ + n_, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty() && !seen[goal]) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t k : adj_[node]) {
        const auto& c = basis_[k];
        const std::size_t other = node < m_ ? m_ + c.col : c.row;
        if (seen[other]) continue;
        seen[other] = true;
        parent_edge[other] = k;
        stack.push_back(other);
      }
    }
    std::vector<std::size_t> path;  // edges from goal back to start
    for (std::size_t node = goal; node != start;) {
      const std::size_t k = parent_edge[node];
      path.push_back(k);
      node = node < m_ ? m_ + basis_[k].col : basis_[k].row;
    }
    std::reverse(path.begin(), path.end());

    // Entering cell gains flow; path edges alternate lose/gain starting at
    // the edge incident to the entering row.
    std::size_t leave = kNone;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const auto& c = basis_[path[p]];
      const bool better = c.flow < theta ||
                          (bland_ && c.flow == theta &&
                           c.row * n_ + c.col < basis_[leave].row * n_ + basis_[leave].col);
      if (better) {
        theta = c.flow;
        leave = path[p];
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      auto& c = basis_[path[p]];
      c.flow = p % 2 == 0 ? std::max(0.0, c.flow - theta) : c.flow + theta;
    }
    basis_[leave] = {row, col, theta};
    return theta;
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  const CostMatrix& cost_;
  std::span<const double> supply_;
  std::span<const double> demand_;
  std::size_t m_;
  std::size_t n_;
  double tol_;
  bool bland_ = false;
  std::vector<BasicCell> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<bool> is_basic_;
  std::vector<double> u_;
  std::vector<double> v_;
};

}  // namespace detail

// Exact minimum-cost transport between supply (rows) and demand (columns).
// Totals must agree to 1e-9; the initial basis comes from Vogel's
// approximation and is improved by MODI pivots until no reduced cost is
// negative. Bland's rule takes over after 10 * (m + n) consecutive
// degenerate pivots.
inline FlowSolution solve_transportation(const CostMatrix& cost, std::span<const double> supply,
                                         std::span<const double> demand,
                                         std::size_t max_pivots = 0) {
  if (supply.size() != cost.rows() || demand.size() != cost.cols()) {
    throw InvalidInput("transportation problem dimensions do not match cost matrix");
  }
  if (supply.empty() || demand.empty()) throw InvalidInput("transportation problem is empty");
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      if (!std::isfinite(cost(i, j))) throw InvalidInput("transportation costs must be finite");
    }
  }
  for (double w : supply) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("supply must be finite and >= 0");
  }
  for (double w : demand) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("demand must be finite and >= 0");
  }
  const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(ts - td) > 1e-9 * std::max(1.0, ts)) {
    throw InvalidInput("unbalanced transportation problem: supply " + std::to_string(ts) +
                       " vs demand " + std::to_string(td));
  }
  if (max_pivots == 0) max_pivots = 50 * cost.rows() * cost.cols() + 1000;
  return detail::TransportationSimplex(cost, supply, demand).solve(max_pivots);
}

}  // namespace archive_lens
