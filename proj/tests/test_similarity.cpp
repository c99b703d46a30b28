#include <gtest/gtest.h>

#include <random>

#include "archive_lens/similarity.hpp"
#include "support/oracles.hpp"

using namespace archive_lens;

namespace {

std::vector<std::vector<double>> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& x : p) x = g(rng);
  return pts;
}

Signature to_signature(const std::vector<std::vector<double>>& pts) {
  std::vector<double> flat;
  for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
  return Signature::uniform(pts.front().size(), flat);
}

}  // namespace

TEST(Signature, Validation) {
  EXPECT_THROW(Signature(2, {0, 0, 1}, {1.0}), InvalidInput);
  EXPECT_THROW(Signature(1, {0, 1}, {0.5, 0.6}), InvalidInput);
  EXPECT_THROW(Signature(1, {0, 1}, {1.5, -0.5}), InvalidInput);
  EXPECT_THROW(Signature::uniform(2, {}), InvalidInput);
  EXPECT_NO_THROW(Signature(1, {0, 1}, {0.25, 0.75}));
}

TEST(Emd, Examples) {
  const auto p = Signature::uniform(2, {0, 0, 1, 0});
  const auto q = Signature::uniform(2, {0, 1, 1, 1});
  EXPECT_NEAR(emd(p, q).distance, 1.0, 1e-12);
  EXPECT_NEAR(emd(Signature::uniform(2, {0, 0}), Signature::uniform(2, {3, 4})).distance, 5.0, 1e-12);
  EXPECT_EQ(emd(p, p).distance, 0.0);
  EXPECT_THROW(emd(p, Signature::uniform(3, {0, 0, 0})), InvalidInput);
}

TEST(Emd, UnequalWeights) {
  // Mass 0.75 at 0 and 0.25 at 4 against a point mass at 1: 0.75 * 1 + 0.25 * 3.
  const Signature p(1, {0, 4}, {0.75, 0.25});
  const auto q = Signature::uniform(1, {1});
  EXPECT_NEAR(emd(p, q).distance, 1.5, 1e-12);
}

TEST(Emd, MatchesPermutationOracle) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng() % 6, dim = 1 + rng() % 4;
    const auto a = random_points(rng, n, dim), b = random_points(rng, n, dim);
    EXPECT_NEAR(emd(to_signature(a), to_signature(b)).distance, oracle::matching_emd(a, b), 1e-9);
  }
}

TEST(Emd, FlowMarginalsAndCertificate) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 40; ++t) {
    const auto a = random_points(rng, 1 + rng() % 9, 3), b = random_points(rng, 1 + rng() % 9, 3);
    const auto p = to_signature(a), q = to_signature(b);
    const auto r = emd(p, q);
    for (std::size_t i = 0; i < p.size(); ++i) {
      double row = 0;
      for (std::size_t j = 0; j < q.size(); ++j) row += r.flow.flow(i, j);
      EXPECT_NEAR(row, p.weights()[i], 1e-9);
    }
    for (std::size_t j = 0; j < q.size(); ++j) {
      double col = 0;
      for (std::size_t i = 0; i < p.size(); ++i) col += r.flow.flow(i, j);
      EXPECT_NEAR(col, q.weights()[j], 1e-9);
    }
    EXPECT_TRUE(certify_optimality(ground_distances(p, q), p.weights(), q.weights(), r.flow).ok);
  }
}

TEST(Emd, MetricAndTransformProperties) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const auto x = to_signature(random_points(rng, 5, 3));
    const auto y = to_signature(random_points(rng, 4, 3));
    const auto z = to_signature(random_points(rng, 6, 3));
    const double xy = emd(x, y).distance, yx = emd(y, x).distance;
    EXPECT_NEAR(xy, yx, 1e-9);
    EXPECT_LE(xy, emd(x, z).distance + emd(z, y).distance + 1e-9);
    EXPECT_NEAR(emd(x, x).distance, 0.0, 1e-12);

    const std::vector<double> shift = {3.0, -1.0, 0.5};
    EXPECT_NEAR(emd(x.transformed(1.0, shift), y.transformed(1.0, shift)).distance, xy, 1e-9);
    EXPECT_NEAR(emd(x.transformed(2.5, std::vector<double>(3, 0.0)),
                    y.transformed(2.5, std::vector<double>(3, 0.0))).distance,
                2.5 * xy, 1e-9);
  }
}

TEST(DistanceMatrix, PhotographersFromFeatures) {
  const std::vector<FeatureVector> f = {
      {"a1", "A", {0, 0}}, {"a2", "A", {1, 0}}, {"b1", "B", {0, 1}}, {"b2", "B", {1, 1}},
      {"c1", "C", {3, 4}}};
  const auto dm = photographer_distance_matrix(f, kDefaultSignatureCap, 0, 2);
  ASSERT_EQ(dm.ids(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_NEAR(dm(0, 1), 1.0, 1e-12);
  EXPECT_EQ(dm(0, 1), dm(1, 0));
  EXPECT_EQ(dm(2, 2), 0.0);
  // C is a point mass: mean distance from A's points to (3, 4).
  EXPECT_NEAR(dm(0, 2), (5.0 + std::sqrt(20.0)) / 2.0, 1e-12);
}

TEST(DistanceMatrix, WorkerCountDoesNotChangeResult) {
  std::mt19937_64 rng(30);
  std::vector<FeatureVector> f;
  for (int i = 0; i < 60; ++i) {
    auto p = random_points(rng, 1, 4)[0];
    f.push_back({"img" + std::to_string(i), "ph" + std::to_string(i % 5), p});
  }
  const auto one = photographer_distance_matrix(f, 8, 3, 1);
  const auto four = photographer_distance_matrix(f, 8, 3, 4);
  for (std::size_t i = 0; i < one.size(); ++i)
    for (std::size_t j = 0; j < one.size(); ++j) EXPECT_EQ(one(i, j), four(i, j));
}

TEST(Signatures, CapSubsamplesDeterministically) {
  std::vector<FeatureVector> f;
  for (int i = 0; i < 30; ++i) f.push_back({"p" + std::to_string(i), "X", {double(i)}});
  const auto a = photographer_signatures(f, 10, 7);
  const auto b = photographer_signatures(f, 10, 7);
  ASSERT_EQ(a.at("X").size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.at("X").point(i)[0], b.at("X").point(i)[0]);
  EXPECT_THROW(photographer_signatures(f, 0, 7), InvalidInput);
  f.push_back({"bad", "Y", {1.0, 2.0}});
  EXPECT_THROW(photographer_signatures(f, 10, 7), InvalidInput);
}
