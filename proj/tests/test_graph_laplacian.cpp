// Copyright 2026 The grtc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "grtc/graph_laplacian.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

namespace grtc {
namespace {

using oracle::Mat;

Mat dense_lap(const GraphAdjacency<double>& g) { return Mat(laplacian_from_adjacency(g).matrix()); }

TEST(Laplacian, PathOfThree) {
  Mat expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  EXPECT_EQ(dense_lap(chain_graph(3)), expected);
}

TEST(Laplacian, EmptyGraphIsZero) { EXPECT_EQ(dense_lap(GraphAdjacency<double>::empty(4)), Mat::Zero(4, 4)); }

TEST(Laplacian, CompleteK3) {
  auto g = GraphAdjacency<double>::from_edges(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  Mat j = Mat::Ones(3, 3);
  Mat i = Mat::Identity(3, 3);
  EXPECT_EQ(dense_lap(g), Mat(2 * i - (j - i)));
}

TEST(Laplacian, RandomWeightedGraphProperties) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    auto g = oracle::random_graph(12, 0.3, rng);
    Mat l = dense_lap(g);
    EXPECT_LT((l - oracle::laplacian(12, g.edges())).norm(), 1e-14);
    EXPECT_LT((l - l.transpose()).norm(), 1e-15);
    EXPECT_LT((l * Eigen::VectorXd::Ones(12)).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> eig(l);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(Adjacency, RejectsInvalidEdges) {
  EXPECT_THROW(GraphAdjacency<double>::from_edges(3, {{0, 0, 1}}), std::invalid_argument);
  EXPECT_THROW(GraphAdjacency<double>::from_edges(3, {{0, 3, 1}}), std::invalid_argument);
  EXPECT_THROW(GraphAdjacency<double>::from_edges(3, {{0, 1, -1}}), std::invalid_argument);
}

TEST(Shifted, ZeroWeightLeavesInputUnchanged) {
  std::mt19937_64 rng(1);
  auto f = oracle::random_factors(Shape({6, 2}), 3, rng);
  ShiftedLaplacian<double> L(laplacian_from_adjacency(oracle::random_graph(6, 0.5, rng)), 0.0);
  EXPECT_EQ(shifted_apply(L, f[0]), f[0]);
}

TEST(Shifted, ConstantsAreFixed) {
  ShiftedLaplacian<double> L(laplacian_from_adjacency(chain_graph(3)), 1.0);
  Mat x = Mat::Ones(3, 1);
  EXPECT_LT((shifted_apply(L, x) - x).norm(), 1e-15);
}

TEST(Shifted, PositiveDefiniteWithUnitFloor) {
  std::mt19937_64 rng(9);
  for (double lam : {0.0, 0.3, 10.0}) {
    ShiftedLaplacian<double> L(laplacian_from_adjacency(oracle::random_graph(10, 0.4, rng)), lam);
    Eigen::SelfAdjointEigenSolver<Mat> eig{Mat(L.matrix())};
    EXPECT_GE(eig.eigenvalues().minCoeff(), 1 - 1e-12);
  }
  EXPECT_THROW(ShiftedLaplacian<double>(GraphLaplacian<double>::zero(2), -1.0), std::invalid_argument);
}

TEST(Quadratic, KernelAndUnitVector) {
  auto lap = laplacian_from_adjacency(chain_graph(3));
  EXPECT_NEAR(laplacian_quadratic(lap, Mat::Constant(3, 2, 4.0)), 0.0, 1e-14);
  Mat e1 = Mat::Zero(3, 1);
  e1(0) = 1;
  EXPECT_DOUBLE_EQ(laplacian_quadratic(lap, e1), 1.0);
}

TEST(Quadratic, EqualsHalfWeightedDifferenceSum) {
  std::mt19937_64 rng(21);
  auto g = oracle::random_graph(9, 0.5, rng);
  auto f = oracle::random_factors(Shape({9, 2}), 3, rng)[0];
  double ref = 0;
  for (const auto& e : g.edges()) ref += e.w * (f.row(e.i) - f.row(e.j)).squaredNorm();
  EXPECT_NEAR(laplacian_quadratic(laplacian_from_adjacency(g), f), ref, 1e-10 * ref);
}

TEST(EpsilonGraph, IdenticalRowsGetUnitWeight) {
  Mat m(2, 3);
  m << 1, 2, 3, 1, 2, 3;
  auto g = epsilon_graph(m, 1.0, 0.5);
  ASSERT_EQ(g.edge_count(), 1);
  EXPECT_DOUBLE_EQ(g.edges()[0].w, 1.0);
}

TEST(EpsilonGraph, SigmaOneOnDistinctRowsIsEmpty) {
  Mat m(3, 2);
  m << 0, 0, 1, 0, 0, 1;
  EXPECT_EQ(epsilon_graph(m, 1.0, 1.0).edge_count(), 0);
}

TEST(EpsilonGraph, TwoClustersLinkOnlyWithinCluster) {
  Mat m(4, 2);
  m << 0, 0, 0.1, 0, 10, 10, 10, 10.1;
  Mat z = Mat::Zero(4, 4);
  std::vector<double> d;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      z(i, j) = (m.row(i) - m.row(j)).squaredNorm();
      if (i < j) d.push_back(z(i, j));
    }
  std::sort(d.begin(), d.end());
  const double median = (d[2] + d[3]) / 2;
  EXPECT_LT((pairwise_distances(m, RowDistance::SquaredEuclidean) - z).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(median_nonzero_distance(z), median);
  std::vector<double> dist;
  for (double v : d) dist.push_back(std::sqrt(v));
  auto g = epsilon_graph(m, (dist[2] + dist[3]) / 2, 0.5);
  ASSERT_EQ(g.edge_count(), 2);
  for (const auto& e : g.edges()) EXPECT_EQ(e.i / 2, e.j / 2);
}

TEST(EpsilonGraph, DensityTargetBoundsEdgeCount) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  Mat m(40, 3);
  for (Index i = 0; i < m.size(); ++i) m(i) = normal(rng) + (i % 40 < 20 ? 0 : 5);
  for (double density : {0.02, 0.05, 0.2}) {
    EpsilonGraphOptions opts;
    opts.density = density;
    auto built = build_epsilon_graph(m, opts);
    EXPECT_LE(static_cast<double>(built.graph.edge_count()), density * 40 * 40 / 2);
    EXPECT_GT(built.graph.edge_count(), 0);
  }
}

TEST(Chain, Structure) {
  auto g2 = chain_graph(2);
  ASSERT_EQ(g2.edge_count(), 1);
  EXPECT_EQ(g2.edges()[0].i, 0);
  EXPECT_EQ(g2.edges()[0].j, 1);
  auto g = chain_graph(100);
  EXPECT_EQ(g.edge_count(), 99);
  Mat l = dense_lap(g);
  EXPECT_EQ(l(0, 0), 1);
  EXPECT_EQ(l(99, 99), 1);
  for (Index i = 1; i < 99; ++i) EXPECT_EQ(l(i, i), 2);
}

TEST(Community, DeterministicExtremes) {
  auto g = community_graph(4, 2, 1.0, 0.0, 3);
  EXPECT_EQ(g.edge_count(), 2);
  for (const auto& e : g.edges()) EXPECT_EQ(community_of(e.i, 4, 2), community_of(e.j, 4, 2));
  EXPECT_EQ(community_graph(10, 2, 0.0, 0.0, 3).edge_count(), 0);
  EXPECT_THROW(community_graph(10, 2, 0.1, 0.2, 3), std::invalid_argument);
}

TEST(Community, IntraEdgeCountWithinThreeSigma) {
  const Index n = 100, c = 5;
  const double p_in = 0.8;
  auto g = community_graph(n, c, p_in, 0.01, 42);
  double pairs = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (i / (n / c) == j / (n / c)) pairs += 1;
  Index intra = 0;
  for (const auto& e : g.edges())
    if (community_of(e.i, n, c) == community_of(e.j, n, c)) ++intra;
  const double mean = p_in * pairs;
  const double sd = std::sqrt(pairs * p_in * (1 - p_in));
  EXPECT_NEAR(static_cast<double>(intra), mean, 3 * sd);
}

TEST(InverseDistance, WeightsFollowDistances) {
  Mat m(3, 1);
  m << 0, 1, 3;
  auto g = inverse_distance_graph(m, 1e-8);
  EXPECT_EQ(g.edge_count(), 3);
  for (const auto& e : g.edges()) EXPECT_NEAR(e.w, 1.0 / (std::abs(m(e.i) - m(e.j)) + 1e-8), 1e-12);
}

TEST(Truncation, RankOneExact) {
  Eigen::VectorXd a(4), b(3);
  a << 1, -2, 3, 0.5;
  b << 2, 1, -1;
  Mat m = a * b.transpose();
  EXPECT_LT((truncated_factorization(m, 1).reconstruct() - m).norm(), 1e-10);
}

TEST(Truncation, FullRankExact) {
  std::mt19937_64 rng(8);
  Mat m = oracle::random_factors(Shape({5, 4}), 4, rng)[0];
  EXPECT_LT((truncated_factorization(m, 4).reconstruct() - m).norm(), 1e-10);
}

TEST(Truncation, ResidualMatchesDiscardedSpectrum) {
  std::mt19937_64 rng(12);
  Mat m = oracle::random_factors(Shape({20, 2}), 15, rng)[0];
  Eigen::JacobiSVD<Mat> svd(m);
  const double ref = svd.singularValues().tail(12).norm();
  const double got = (truncated_factorization(m, 3).reconstruct() - m).norm();
  EXPECT_NEAR(got, ref, 1e-6 * ref);
}

}  // namespace
}  // namespace grtc
