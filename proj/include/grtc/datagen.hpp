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

/// @file datagen.hpp
/// Synthetic low-rank tensors whose first-mode factor is smooth on a graph,
/// and uniform sampling of observed entries.

#pragma once

#include "grtc/graph_laplacian.hpp"
#include "grtc/tensor_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace grtc {

/// Eigenvalues of the first-mode Laplacian below this are treated as zero
/// when the smoothing operator is formed.
inline constexpr double kEigenCutoff = 1e-8;

template <typename Scalar = double>
struct SyntheticSpec {
  Shape shape;
  Index rank = 1;
  GraphAdjacency<Scalar> graph;  // first mode
  double snr_db = 20.0;          // +inf gives a noise-free tensor
  std::uint64_t seed = 0;
};

template <typename Scalar = double>
struct SyntheticTensor {
  CPFactors<Scalar> factors;  // factors[0] already smoothed
  DenseTensor<Scalar> signal;
  DenseTensor<Scalar> observed;  // signal + noise
  Scalar noise_sigma = 0;
};

/// Ubar * pinv(Lambdabar) from the eigendecomposition Lap = Ubar Lambdabar Ubar^T.
template <typename Scalar>
Matrix<Scalar> graph_smoother(const GraphLaplacian<Scalar>& lap) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(Matrix<Scalar>(lap.matrix()));
  if (eig.info() != Eigen::Success) throw SolverError("graph_smoother: eigendecomposition failed");
  Vector<Scalar> inv = eig.eigenvalues().unaryExpr(
      [](Scalar v) { return std::abs(v) < static_cast<Scalar>(kEigenCutoff) ? Scalar(0) : Scalar(1) / v; });
  return eig.eigenvectors() * inv.asDiagonal();
}

/// sigma = ||signal||_F / (sqrt(N) 10^(snr/20)), so that the expected
/// ||signal||^2 / ||noise||^2 equals 10^(snr/10).
template <typename Scalar>
Scalar noise_sigma_for_snr(Scalar signal_norm, Index numel, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0;
  return signal_norm / (std::sqrt(static_cast<Scalar>(numel)) * static_cast<Scalar>(std::pow(10.0, snr_db / 20.0)));
}

/// 10 log10(||signal||^2 / ||observed - signal||^2).
template <typename Scalar>
double empirical_snr_db(const SyntheticTensor<Scalar>& t) {
  const double s = static_cast<double>(t.signal.data().squaredNorm());
  const double e = static_cast<double>((t.observed.data() - t.signal.data()).squaredNorm());
  return 10.0 * std::log10(s / e);
}

template <typename Scalar>
SyntheticTensor<Scalar> synth_graph_tensor(const SyntheticSpec<Scalar>& spec) {
  detail::require(spec.shape.order() >= 2, "synth_graph_tensor: need order >= 2");
  detail::require(spec.rank >= 1, "synth_graph_tensor: rank must be positive");
  detail::require(!std::isnan(spec.snr_db) && spec.snr_db > -std::numeric_limits<double>::infinity(),
                  "synth_graph_tensor: invalid SNR");
  if (spec.graph.nodes() != spec.shape.dim(0))
    detail::fail_arg("synth_graph_tensor: graph has " + std::to_string(spec.graph.nodes()) + " nodes, mode 1 has " +
                     std::to_string(spec.shape.dim(0)));
  std::mt19937_64 rng(spec.seed);
  auto raw = CPFactors<Scalar>::random_normal(spec.shape, spec.rank, rng);
  std::vector<Matrix<Scalar>> f = raw.factors();
  f[0] = graph_smoother(laplacian_from_adjacency(spec.graph)) * f[0];
  SyntheticTensor<Scalar> out{CPFactors<Scalar>(std::move(f)), {}, {}, 0};
  out.signal = DenseTensor<Scalar>::from_cp(out.factors);
  const Index n = spec.shape.numel();
  out.noise_sigma = noise_sigma_for_snr(out.signal.data().norm(), n, spec.snr_db);
  Vector<Scalar> noisy = out.signal.data();
  if (out.noise_sigma > 0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index e = 0; e < n; ++e) noisy(e) += out.noise_sigma * static_cast<Scalar>(normal(rng));
  }
  out.observed = DenseTensor<Scalar>(spec.shape, std::move(noisy));
  return out;
}

/// Random or fixed graph over the first-mode index set.
struct GraphRecipe {
  enum class Kind { Community, Chain };
  Kind kind = Kind::Community;
  Index communities = 5;
  double p_in = 0.3;
  double p_out = 0.01;
};

inline GraphAdjacency<double> make_graph(const GraphRecipe& recipe, Index nodes, std::uint64_t seed) {
  if (recipe.kind == GraphRecipe::Kind::Chain) return chain_graph<double>(nodes);
  return community_graph<double>(nodes, recipe.communities, recipe.p_in, recipe.p_out, seed);
}

struct SamplingSpec {
  double rate = 0.1;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  double test_fraction = 0.2;
};

/// Sorted linear offsets of the sampled entries.
struct SampledIndices {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// ceil(rate N); a tolerance keeps products like 0.05 * 90000 from rounding up.
inline Index sample_count(Index numel, double rate) {
  const double raw = rate * static_cast<double>(numel);
  return std::clamp<Index>(static_cast<Index>(std::ceil(raw - 1e-9 * std::max(1.0, raw))), 1, numel);
}

inline Index fraction_count(Index n, double fraction) {
  const double raw = fraction * static_cast<double>(n);
  return std::min<Index>(n, static_cast<Index>(std::floor(raw + 1e-9 * std::max(1.0, raw))));
}

inline SampledIndices sample_omega(const Shape& shape, const SamplingSpec& spec) {
  if (!(spec.rate > 0 && spec.rate <= 1)) detail::fail_arg("sample_omega: rate must lie in (0, 1]");
  if (!(spec.train_fraction >= 0 && spec.test_fraction >= 0 && spec.train_fraction + spec.test_fraction <= 1 + 1e-12))
    detail::fail_arg("sample_omega: train/test fractions must be nonnegative and sum to at most 1");
  const Index n = shape.numel();
  if (spec.rate * static_cast<double>(n) < 1 - 1e-9) detail::fail_arg("sample_omega: rate * numel < 1");
  const Index count = sample_count(n, spec.rate);

  std::mt19937_64 rng(spec.seed);
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  // Partial Fisher-Yates: the first `count` slots end up a uniform random subset in random order.
  for (Index s = 0; s < count; ++s) {
    std::uniform_int_distribution<Index> pick(s, n - 1);
    std::swap(all[static_cast<std::size_t>(s)], all[static_cast<std::size_t>(pick(rng))]);
  }
  const Index n_train = fraction_count(count, spec.train_fraction);
  const Index n_test = std::min(count - n_train, fraction_count(count, spec.test_fraction));
  SampledIndices out;
  out.train.assign(all.begin(), all.begin() + n_train);
  out.test.assign(all.begin() + n_train, all.begin() + n_train + n_test);
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Entries of `tensor` at the given linear offsets.
template <typename Scalar>
SparseObservations<Scalar> observe(const DenseTensor<Scalar>& tensor, std::span<const Index> offsets) {
  std::vector<Scalar> vals;
  vals.reserve(offsets.size());
  for (Index lin : offsets) {
    if (lin < 0 || lin >= tensor.shape().numel()) throw DataError("observe: offset out of range");
    vals.push_back(tensor.at_linear(lin));
  }
  return SparseObservations<Scalar>::from_linear(tensor.shape(), offsets, std::span<const Scalar>(vals));
}

}  // namespace grtc
