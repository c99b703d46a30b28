#include <gtest/gtest.h>

#include <random>

#include "archive_lens/transport.hpp"

using namespace archive_lens;

namespace {

double brute_force_assignment(const CostMatrix& c) {
  std::vector<std::size_t> perm(c.rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST(Transportation, TextbookInstance) {
  // Supplies 20/30/25, demands 10/35/30; optimum 735, frozen from an
  // independent LP solve.
  CostMatrix c(3, 3);
  const double v[3][3] = {{8, 6, 10}, {9, 12, 13}, {14, 9, 16}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = v[i][j];
  const std::vector<double> s = {20, 30, 25}, d = {10, 35, 30};
  const auto sol = solve_transportation(c, s, d);
  EXPECT_NEAR(sol.total_cost, 735.0, 1e-9);
  EXPECT_EQ(sol.basis.size(), 5u);
  EXPECT_TRUE(certify_optimality(c, s, d, sol).ok);
}

TEST(Transportation, AssignmentMatchesBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> cost(0, 20);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 6;
    CostMatrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = cost(rng);
    const std::vector<double> w(n, 1.0);
    const auto sol = solve_transportation(c, w, w);
    EXPECT_NEAR(sol.total_cost, brute_force_assignment(c), 1e-9);
    const auto cert = certify_optimality(c, w, w, sol);
    EXPECT_TRUE(cert.ok) << cert.failure;
    EXPECT_EQ(sol.basis.size(), 2 * n - 1);
  }
}

TEST(Transportation, RandomRectangularCertified) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng() % 12, n = 1 + rng() % 12;
    CostMatrix c(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = u(rng);
    std::vector<double> s(m), d(n);
    for (auto& x : s) x = u(rng) + 0.01;
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    double rest = total;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      d[j] = total / static_cast<double>(n);
      rest -= d[j];
    }
    d[n - 1] = rest;
    const auto sol = solve_transportation(c, s, d);
    const auto cert = certify_optimality(c, s, d, sol);
    EXPECT_TRUE(cert.ok) << cert.failure;
    for (double f : sol.flows) EXPECT_GE(f, 0.0);
  }
}

TEST(Transportation, HeavilyDegenerateInstance) {
  // All-equal costs and unit weights: every feasible plan is optimal.
  const std::size_t n = 20;
  CostMatrix c(n, n, 1.0);
  const std::vector<double> w(n, 1.0 / n);
  const auto sol = solve_transportation(c, w, w);
  EXPECT_NEAR(sol.total_cost, 1.0, 1e-12);
  EXPECT_TRUE(certify_optimality(c, w, w, sol).ok);
}

TEST(Transportation, Errors) {
  CostMatrix c(2, 2, 1.0);
  const std::vector<double> one = {0.5, 0.5};
  EXPECT_THROW(solve_transportation(c, std::vector<double>{0.5, 0.6}, one), InvalidInput);
  EXPECT_THROW(solve_transportation(c, std::vector<double>{1.0}, one), InvalidInput);
  EXPECT_THROW(solve_transportation(c, std::vector<double>{-0.5, 1.5}, one), InvalidInput);
  CostMatrix bad(2, 2, std::nan(""));
  EXPECT_THROW(solve_transportation(bad, one, one), InvalidInput);
}

TEST(Certificate, DetectsSuboptimalPlan) {
  CostMatrix c(2, 2);
  c(0, 0) = 0; c(0, 1) = 1; c(1, 0) = 1; c(1, 1) = 0;
  const std::vector<double> w = {0.5, 0.5};
  auto sol = solve_transportation(c, w, w);
  ASSERT_TRUE(certify_optimality(c, w, w, sol).ok);
  sol.flows = {0.0, 0.5, 0.5, 0.0};
  sol.total_cost = 1.0;
  EXPECT_FALSE(certify_optimality(c, w, w, sol).ok);
}
