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

#include "grtc/tensor_core.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

namespace grtc {
namespace {

using oracle::Mat;
using oracle::Vec;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

TEST(Kronecker, SmallVectors) {
  EXPECT_EQ(kronecker(vec({1, 2}), vec({3, 4})), vec({3, 4, 6, 8}));
  EXPECT_EQ(kronecker(vec({1}), vec({5, 6})), vec({5, 6}));
  EXPECT_EQ(kronecker(vec({0, 1}), vec({1, 0})), vec({0, 0, 1, 0}));
}

TEST(Kronecker, MatchesEigenKroneckerOnRandomVectors) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    Vec u(1 + t % 4), v(1 + t % 5);
    for (Index k = 0; k < u.size(); ++k) u(k) = normal(rng);
    for (Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
    Mat ref = Eigen::kroneckerProduct(Mat(u), Mat(v));
    EXPECT_LT((kronecker(u, v) - Vec(ref.col(0))).norm(), 1e-14);
  }
}

TEST(KhatriRao, RankOneReducesToKronecker) {
  Mat u(2, 1), v(2, 1);
  u << 1, 2;
  v << 3, 4;
  Mat expected(4, 1);
  expected << 3, 4, 6, 8;
  EXPECT_EQ(khatri_rao<double>({u, v}), expected);
}

TEST(KhatriRao, UnitColumns) {
  Mat eye = Mat::Identity(2, 2);
  Mat kr = khatri_rao<double>({eye, eye});
  Vec e1 = vec({1, 0}), e2 = vec({0, 1});
  EXPECT_EQ(Vec(kr.col(0)), kronecker(e1, e1));
  EXPECT_EQ(Vec(kr.col(1)), kronecker(e2, e2));
}

TEST(KhatriRao, MismatchedColumnsThrow) {
  EXPECT_THROW(khatri_rao<double>({Mat::Ones(2, 2), Mat::Ones(3, 3)}), std::invalid_argument);
}

TEST(KhatriRao, ExcludingMatchesDenseOracle) {
  std::mt19937_64 rng(5);
  Shape shape({4, 3, 5, 2});
  auto f = oracle::random_factors(shape, 3, rng);
  CPFactors<double> cp(f);
  for (Index i = 0; i < 4; ++i) {
    Mat ref = oracle::khatri_rao_dense(f, {i});
    EXPECT_LT(oracle::rel_diff(khatri_rao_excluding(cp, i), ref), 1e-14);
    const Index ex[] = {i};
    Vec norms = khatri_rao_col_norms_sq(cp, std::span<const Index>(ex));
    EXPECT_LT((norms - Vec(ref.colwise().squaredNorm().transpose())).norm(), 1e-10 * norms.norm());
  }
}

TEST(KhatriRao, ColumnNormsOfProduct) {
  CPFactors<double> cp({Mat::Constant(2, 1, 1.0), Mat(vec({1, 2})), Mat(vec({1, 1}))});
  const Index ex[] = {0};
  EXPECT_DOUBLE_EQ(khatri_rao_col_norms_sq(cp, std::span<const Index>(ex))(0), 10.0);
  const Index ex2[] = {0, 2};
  EXPECT_DOUBLE_EQ(khatri_rao_col_norms_sq(cp, std::span<const Index>(ex2))(0), 5.0);
}

TEST(MatIndex, WorkedExamples) {
  Shape s({2, 3, 4});
  const Index a[] = {1, 2, 3};
  EXPECT_EQ(mat_index(s, 0, a), (UnfoldedIndex{1, 11}));
  const Index b[] = {0, 0, 0};
  EXPECT_EQ(mat_index(s, 0, b), (UnfoldedIndex{0, 0}));
  Shape m({5, 7});
  const Index c[] = {2, 5};
  EXPECT_EQ(mat_index(m, 1, c), (UnfoldedIndex{5, 2}));
}

TEST(MatIndex, BijectionOnEveryMode) {
  Shape s({3, 4, 2, 5});
  for (Index mode = 0; mode < s.order(); ++mode) {
    std::vector<int> hit(static_cast<std::size_t>(s.numel()), 0);
    for (Index lin = 0; lin < s.numel(); ++lin) {
      auto idx = multi_index(s, lin);
      auto at = mat_index(s, mode, idx);
      EXPECT_EQ(at.col, oracle::unfolded_col(s.dims(), mode, idx));
      EXPECT_EQ(fold_index(s, mode, at), idx);
      ++hit[static_cast<std::size_t>(at.row * s.unfolded_cols(mode) + at.col)];
    }
    for (int h : hit) EXPECT_EQ(h, 1);
  }
}

TEST(MatIndex, OutOfBoundsThrows) {
  Shape s({2, 3});
  const Index bad[] = {2, 0};
  EXPECT_THROW(mat_index(s, 0, bad), std::out_of_range);
  const Index ok[] = {1, 0};
  EXPECT_THROW(mat_index(s, 2, ok), std::out_of_range);
  EXPECT_THROW(multi_index(s, 6), std::out_of_range);
}

TEST(LinearIndex, RoundTrip) {
  Shape s({3, 2, 4});
  for (Index lin = 0; lin < s.numel(); ++lin) EXPECT_EQ(linear_index(s, multi_index(s, lin)), lin);
}

TEST(Shape, RejectsBadDims) {
  EXPECT_THROW(Shape({3}), std::invalid_argument);
  EXPECT_THROW(Shape({3, 0}), std::invalid_argument);
  EXPECT_EQ(Shape({2, 3, 4}).numel(), 24);
  EXPECT_EQ(Shape({2, 3, 4}).to_string(), "(2,3,4)");
}

TEST(SparseObservations, CanonicalOrderAndDuplicates) {
  Shape s({2, 2});
  SparseObservations<double> obs(s, {1, 1, 0, 1, 0, 0}, {4, 2, 1});
  ASSERT_EQ(obs.size(), 3);
  EXPECT_EQ(obs.value(0), 1);
  EXPECT_EQ(obs.value(2), 4);
  EXPECT_THROW(SparseObservations<double>(s, {0, 0, 0, 0}, {1, 2}), DataError);
  EXPECT_THROW(SparseObservations<double>(s, {0, 2}, {1}), DataError);
  EXPECT_THROW(SparseObservations<double>(s, {0, 0, 1}, {1}), DataError);
}

TEST(SparseObservations, FullMatrixUnfoldsToItself) {
  Shape s({2, 2});
  SparseObservations<double> obs(s, {0, 0, 1, 0, 0, 1, 1, 1}, {1, 2, 3, 4});
  const auto& g = obs.grouping(0);
  ASSERT_EQ(g.rows(), 2);
  Mat m = Mat::Zero(2, 2);
  for (Index row = 0; row < 2; ++row)
    for (Index p = g.row_ptr[static_cast<std::size_t>(row)]; p < g.row_ptr[static_cast<std::size_t>(row) + 1]; ++p)
      m(row, g.col[static_cast<std::size_t>(p)]) = obs.value(g.entry[static_cast<std::size_t>(p)]);
  Mat expected(2, 2);
  expected << 1, 3, 2, 4;
  EXPECT_EQ(m, expected);
}

TEST(SparseObservations, SingleEntryGrouping) {
  Shape s({2, 3, 4});
  SparseObservations<double> obs(s, {1, 2, 3}, {7});
  const auto& g = obs.grouping(0);
  EXPECT_EQ(g.row_size(0), 0);
  EXPECT_EQ(g.row_size(1), 1);
  EXPECT_EQ(g.col[0], 11);
}

TEST(SparseObservations, GroupingPartitionsEntries) {
  std::mt19937_64 rng(11);
  Shape s({5, 4, 6});
  auto obs = oracle::random_obs(s, 0.3, rng);
  for (Index mode = 0; mode < 3; ++mode) {
    const auto& g = obs.grouping(mode);
    std::vector<int> seen(static_cast<std::size_t>(obs.size()), 0);
    for (Index row = 0; row < g.rows(); ++row)
      for (Index p = g.row_ptr[static_cast<std::size_t>(row)]; p < g.row_ptr[static_cast<std::size_t>(row) + 1]; ++p) {
        const Index e = g.entry[static_cast<std::size_t>(p)];
        ++seen[static_cast<std::size_t>(e)];
        EXPECT_EQ(obs.index(e)[static_cast<std::size_t>(mode)], row);
      }
    for (int v : seen) EXPECT_EQ(v, 1);
  }
}

TEST(CPReconstruct, RankOneEntry) {
  CPFactors<double> cp({Mat(vec({1, 2})), Mat(vec({3, 4}))});
  const Index at[] = {1, 0};
  EXPECT_DOUBLE_EQ(cp_reconstruct_at(cp, at), 6.0);
}

TEST(CPReconstruct, DenseFromCPMatchesEntrywiseSum) {
  std::mt19937_64 rng(2);
  Shape s({3, 4, 2});
  auto f = oracle::random_factors(s, 2, rng);
  CPFactors<double> cp(f);
  auto dense = DenseTensor<double>::from_cp(cp);
  for (Index lin = 0; lin < s.numel(); ++lin) {
    auto idx = multi_index(s, lin);
    EXPECT_NEAR(dense.at_linear(lin), oracle::cp_value(f, idx), 1e-12);
    EXPECT_NEAR(cp_reconstruct_at(cp, idx), oracle::cp_value(f, idx), 1e-12);
  }
  for (Index mode = 0; mode < 3; ++mode) {
    Mat unf = dense.unfold(mode);
    Mat ref = f[static_cast<std::size_t>(mode)] * oracle::khatri_rao_dense(f, {mode}).transpose();
    EXPECT_LT(oracle::rel_diff(unf, ref), 1e-13);
  }
}

TEST(Residual, ExactAndZeroFactors) {
  std::mt19937_64 rng(4);
  Shape s({3, 3, 3});
  CPFactors<double> cp(oracle::random_factors(s, 2, rng));
  auto dense = DenseTensor<double>::from_cp(cp);
  std::vector<Index> offsets{0, 4, 9, 26};
  std::vector<double> vals;
  for (Index o : offsets) vals.push_back(dense.at_linear(o));
  auto obs = SparseObservations<double>::from_linear(s, offsets, vals);
  auto res = residual_on_omega(cp, obs);
  for (double v : res.values()) EXPECT_NEAR(v, 0.0, 1e-12);
  auto zero = residual_on_omega(CPFactors<double>::zeros(s, 2), obs);
  EXPECT_EQ(zero, obs);
}

TEST(CPFactors, Validation) {
  EXPECT_THROW(CPFactors<double>({Mat::Ones(2, 2)}), std::invalid_argument);
  EXPECT_THROW(CPFactors<double>({Mat::Ones(2, 2), Mat::Ones(2, 3)}), std::invalid_argument);
  CPFactors<double> cp({Mat::Ones(2, 2), Mat::Ones(3, 2)});
  EXPECT_THROW(cp.set_factor(0, Mat::Ones(3, 2)), std::invalid_argument);
  EXPECT_TRUE(cp.matches(Shape({2, 3})));
  EXPECT_FALSE(cp.matches(Shape({3, 2})));
}

}  // namespace
}  // namespace grtc
