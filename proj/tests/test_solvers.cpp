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

#include "grtc/solvers.hpp"

#include "grtc/datagen.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace grtc {
namespace {

using oracle::Mat;
using oracle::Vec;

TEST(LinearCG, IdentityConvergesInOneStep) {
  Vec rhs = Vec::LinSpaced(5, 1, 5);
  auto res = linear_cg<double>([](const Vec& x) { return x; }, rhs, Vec::Zero(5), CGConfig{1e-12, 100});
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LT((res.x - rhs).norm(), 1e-14);
}

TEST(LinearCG, TwoDistinctEigenvaluesWithinTwoSteps) {
  Vec d(2), rhs(2);
  d << 2, 3;
  rhs << 2, 3;
  auto res = linear_cg<double>([&](const Vec& x) { return Vec(d.cwiseProduct(x)); }, rhs, Vec::Zero(2),
                               CGConfig{1e-12, 100});
  EXPECT_LE(res.iterations, 2);
  EXPECT_LT((res.x - Vec::Ones(2)).norm(), 1e-12);
}

TEST(LinearCG, RandomSPDMatchesDirectSolve) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    Mat g = oracle::random_factors(Shape({30, 2}), 30, rng)[0];
    Mat m = g * g.transpose() + Mat::Identity(30, 30);
    Vec rhs = oracle::random_factors(Shape({30, 2}), 1, rng)[0];
    Vec ref = m.llt().solve(rhs);
    auto res = linear_cg<double>([&](const Vec& x) { return Vec(m * x); }, rhs, Vec::Zero(30), CGConfig{1e-10, 1000});
    EXPECT_LT((res.x - ref).norm(), 1e-6 * ref.norm());
    EXPECT_LE(res.residual_norm, 1e-10 * res.initial_residual_norm);
  }
}

TEST(LinearCG, ZeroRightHandSideReturnsImmediately) {
  auto res = linear_cg<double>([](const Vec& x) { return x; }, Vec::Zero(3), Vec::Zero(3), CGConfig{});
  EXPECT_EQ(res.iterations, 0);
}

TEST(LinearCG, IndefiniteOperatorThrows) {
  Vec rhs = Vec::Ones(2);
  EXPECT_THROW(linear_cg<double>([](const Vec& x) { return Vec(-x); }, rhs, Vec::Zero(2), CGConfig{}), SolverError);
}

TEST(LinearCG, InvalidConfigRejected) {
  EXPECT_THROW((CGConfig{0.0, 10}.validate()), ConfigError);
  EXPECT_THROW((CGConfig{1e-6, 0}.validate()), ConfigError);
}

std::vector<GraphLaplacian<double>> zero_laps(const Shape& s) {
  std::vector<GraphLaplacian<double>> out;
  for (Index m : s.dims()) out.push_back(GraphLaplacian<double>::zero(m));
  return out;
}

SparseObservations<double> fully_observed(const CPFactors<double>& cp) {
  auto dense = DenseTensor<double>::from_cp(cp);
  std::vector<Index> all(static_cast<std::size_t>(dense.shape().numel()));
  std::iota(all.begin(), all.end(), Index{0});
  return observe(dense, all);
}

struct Setup {
  Problem<double> problem;
  CPFactors<double> init;
};

Setup graph_setup(std::uint64_t seed, Shape shape, Index rank, double rate, double lambda, double lambda_L) {
  std::mt19937_64 rng(seed);
  CPFactors<double> truth = CPFactors<double>::random_normal(shape, rank, rng);
  auto dense = DenseTensor<double>::from_cp(truth);
  auto omega = sample_omega(shape, SamplingSpec{rate, seed, 1.0, 0.0});
  std::vector<GraphLaplacian<double>> laps{laplacian_from_adjacency(oracle::random_graph(shape.dim(0), 0.3, rng))};
  Problem<double> p(observe(dense, omega.train), laps, Regularization<double>::uniform(shape.order(), lambda, lambda_L));
  return {p, CPFactors<double>::random_normal(shape, rank, rng)};
}

TEST(AltMin, StopsAfterOneSweepAtGlobalMinimizer) {
  std::mt19937_64 rng(2);
  Shape s({4, 3, 5});
  auto cp = CPFactors<double>::random_normal(s, 2, rng);
  Problem<double> p(fully_observed(cp), zero_laps(s), Regularization<double>::uniform(3, 0.0, 0.0));
  auto res = altmin_cg(p, cp, StoppingRule{}, CGConfig{1e-10, 500});
  ASSERT_EQ(res.report.records.size(), 1u);
  EXPECT_EQ(res.report.termination, Termination::DeltaTol);
  EXPECT_LT(res.report.records[0].train_re, 1e-8);
}

TEST(AltMin, RecoversFullyObservedRankOneTensor) {
  std::mt19937_64 rng(3);
  Shape s({5, 5, 5});
  auto truth = CPFactors<double>::random_normal(s, 1, rng);
  Problem<double> p(fully_observed(truth), zero_laps(s), Regularization<double>::uniform(3, 1e-6, 0.0));
  auto init = CPFactors<double>::random_normal(s, 1, rng);
  auto res = altmin_cg(p, init, StoppingRule{1e-12, std::numeric_limits<double>::infinity(), 500}, CGConfig{1e-12, 100});
  EXPECT_LE(res.report.records.back().train_re, 1e-3);
  for (std::size_t t = 1; t < res.report.records.size(); ++t)
    EXPECT_LE(res.report.records[t].objective, res.report.records[t - 1].objective * (1 + 1e-12) + 1e-12);
}

TEST(AltMin, ObjectiveIsMonotoneWithGraphRegularization) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto st = graph_setup(seed, Shape({12, 8, 6}), 3, 0.3, 0.05, 2.0);
    const double f0 = objective_value(st.problem, st.init);
    auto exact = altmin_exact(st.problem, st.init, StoppingRule{0, std::numeric_limits<double>::infinity(), 30});
    auto cg = altmin_cg(st.problem, st.init, StoppingRule{0, std::numeric_limits<double>::infinity(), 30},
                        CGConfig{1e-12, 2000});
    double prev = f0;
    for (const auto& r : exact.report.records) {
      EXPECT_LE(r.objective, prev + 1e-12 * std::abs(prev));
      prev = r.objective;
    }
    prev = f0;
    for (const auto& r : cg.report.records) {
      EXPECT_LE(r.objective, prev + 1e-10 * std::abs(prev));
      prev = r.objective;
    }
    EXPECT_NEAR(cg.report.records.back().objective, exact.report.records.back().objective,
                1e-6 * exact.report.records.back().objective);
  }
}

TEST(AltMin, ReportsTestMetricsAndIterationBudget) {
  auto st = graph_setup(4, Shape({6, 5, 4}), 2, 0.5, 0.1, 1.0);
  auto dense = DenseTensor<double>::from_cp(st.init);
  std::vector<Index> some{0, 7, 33, 91};
  auto test = observe(dense, some);
  SolveOptions<double> opts{&test};
  auto res = altmin_cg(st.problem, st.init, StoppingRule{0, std::numeric_limits<double>::infinity(), 3}, CGConfig{},
                       opts);
  ASSERT_EQ(res.report.records.size(), 3u);
  EXPECT_EQ(res.report.termination, Termination::MaxIters);
  EXPECT_TRUE(std::isfinite(res.report.records[0].test_re));
  EXPECT_TRUE(std::isnan(res.report.records[0].primal_residual));
  EXPECT_GT(res.report.total_inner_iters(), 0);
}

TEST(AltMin, TimeBudgetStopsEarly) {
  auto st = graph_setup(5, Shape({20, 15, 10}), 3, 0.2, 0.1, 1.0);
  auto res = altmin_cg(st.problem, st.init, StoppingRule{0, 1e-9, 500}, CGConfig{});
  EXPECT_EQ(res.report.termination, Termination::TimeBudget);
  EXPECT_EQ(res.report.records.size(), 1u);
}

TEST(AltMin, DeterministicTrajectory) {
  auto st = graph_setup(6, Shape({10, 8, 6}), 2, 0.3, 0.1, 1.0);
  StoppingRule stop{0, std::numeric_limits<double>::infinity(), 10};
  auto a = altmin_cg(st.problem, st.init, stop, CGConfig{});
  auto b = altmin_cg(st.problem, st.init, stop, CGConfig{});
  ASSERT_EQ(a.report.records.size(), b.report.records.size());
  for (std::size_t t = 0; t < a.report.records.size(); ++t)
    EXPECT_EQ(a.report.records[t].objective, b.report.records[t].objective);
}

TEST(AltMin, RejectsMismatchedInit) {
  auto st = graph_setup(7, Shape({6, 5, 4}), 2, 0.5, 0.1, 1.0);
  auto bad = CPFactors<double>::zeros(Shape({6, 5, 3}), 2);
  EXPECT_THROW(altmin_cg(st.problem, bad, StoppingRule{}, CGConfig{}), std::invalid_argument);
  EXPECT_THROW(altmin_cg(st.problem, st.init, StoppingRule{-1}, CGConfig{}), ConfigError);
}

TEST(ADMM, UnregularizedFirstSplitHasNoGap) {
  auto st = graph_setup(8, Shape({6, 5, 4}), 2, 0.5, 0.0, 0.0);
  auto res = admm(st.problem, st.init, StoppingRule{0, std::numeric_limits<double>::infinity(), 1}, ADMMConfig{});
  ASSERT_EQ(res.report.records.size(), 1u);
  EXPECT_EQ(res.report.records[0].primal_residual, 0.0);
}

TEST(ADMM, ReachesAltMinObjectiveOnSmallInstance) {
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto st = graph_setup(20 + seed, Shape({10, 8, 6}), 2, 0.4, 0.1, 1.0);
    StoppingRule stop{1e-9, std::numeric_limits<double>::infinity(), 2000};
    auto ref = altmin_cg(st.problem, st.init, stop, CGConfig{1e-12, 2000});
    ADMMConfig cfg;
    auto got = admm(st.problem, st.init, stop, cfg);
    const double fa = ref.report.records.back().objective;
    const double fb = got.report.records.back().objective;
    EXPECT_LE(got.report.records.back().primal_residual, 1e-4);
    if (std::abs(fb - fa) <= 0.01 * fa) ++agree;
  }
  EXPECT_GE(agree, 4);
}

TEST(ADMM, InvalidConfigRejected) {
  ADMMConfig cfg;
  cfg.gamma = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ADMMConfig{};
  cfg.eta_max = 0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Ridge, OnlyWhenAllWeightsVanish) {
  EXPECT_EQ(subproblem_ridge(Regularization<double>::uniform(3, 0.0, 0.0)), kUnregularizedRidge);
  EXPECT_EQ(subproblem_ridge(Regularization<double>{{0.0, 0.1, 0.0}, 0.0}), 0.0);
}

}  // namespace
}  // namespace grtc
