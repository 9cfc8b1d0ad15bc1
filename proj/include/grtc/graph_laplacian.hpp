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

/// @file graph_laplacian.hpp
/// Similarity graphs over the rows of a factor matrix and the (shifted)
/// graph Laplacians used by the regularizer.

#pragma once

#include "grtc/common.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace grtc {

/// Undirected weighted edge, 0-based endpoints.
template <typename Scalar>
struct Edge {
  Index i = 0;
  Index j = 0;
  Scalar w = 1;
};

/// Symmetric, zero-diagonal, nonnegative sparse weight matrix.
template <typename Scalar>
class GraphAdjacency {
 public:
  GraphAdjacency() = default;

  explicit GraphAdjacency(SparseMatrix<Scalar> w) : w_(std::move(w)) {
    detail::require(w_.rows() == w_.cols(), "GraphAdjacency: weight matrix must be square");
    w_.prune(Scalar(0));
    w_.makeCompressed();
    for (Index c = 0; c < w_.outerSize(); ++c)
      for (typename SparseMatrix<Scalar>::InnerIterator it(w_, c); it; ++it) {
        detail::require(std::isfinite(it.value()), "GraphAdjacency: non-finite weight");
        detail::require(it.value() >= 0, "GraphAdjacency: negative weight");
        detail::require(it.row() != it.col(), "GraphAdjacency: nonzero diagonal");
      }
    SparseMatrix<Scalar> t = w_.transpose();
    SparseMatrix<Scalar> diff = w_ - t;
    diff.prune(Scalar(0));
    detail::require(diff.nonZeros() == 0, "GraphAdjacency: weight matrix is not symmetric");
  }

  /// Each undirected edge listed once; repeated edges are summed.
  static GraphAdjacency from_edges(Index n, const std::vector<Edge<Scalar>>& edges) {
    detail::require(n >= 0, "GraphAdjacency: negative node count");
    std::vector<Eigen::Triplet<Scalar, Index>> trip;
    trip.reserve(edges.size() * 2);
    for (const auto& e : edges) {
      detail::require(e.i >= 0 && e.i < n && e.j >= 0 && e.j < n, "GraphAdjacency: edge endpoint out of range");
      detail::require(e.i != e.j, "GraphAdjacency: self loop");
      trip.emplace_back(e.i, e.j, e.w);
      trip.emplace_back(e.j, e.i, e.w);
    }
    SparseMatrix<Scalar> w(n, n);
    w.setFromTriplets(trip.begin(), trip.end());
    return GraphAdjacency(std::move(w));
  }

  static GraphAdjacency empty(Index n) { return GraphAdjacency(SparseMatrix<Scalar>(n, n)); }

  Index nodes() const { return w_.rows(); }
  const SparseMatrix<Scalar>& weights() const { return w_; }

  /// Number of undirected edges.
  Index edge_count() const { return w_.nonZeros() / 2; }

  /// Edges with i < j, ordered by (i, j).
  std::vector<Edge<Scalar>> edges() const {
    std::vector<Edge<Scalar>> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    for (Index i = 0; i < w_.outerSize(); ++i)
      for (typename SparseMatrix<Scalar>::InnerIterator it(w_, i); it; ++it)
        if (it.row() > i) out.push_back({i, it.row(), it.value()});
    return out;
  }

 private:
  SparseMatrix<Scalar> w_;
};

/// Lap = diag(W 1) - W.
template <typename Scalar>
class GraphLaplacian {
 public:
  GraphLaplacian() = default;
  explicit GraphLaplacian(SparseMatrix<Scalar> lap) : lap_(std::move(lap)) {
    detail::require(lap_.rows() == lap_.cols(), "GraphLaplacian: matrix must be square");
  }

  static GraphLaplacian zero(Index n) { return GraphLaplacian(SparseMatrix<Scalar>(n, n)); }

  Index nodes() const { return lap_.rows(); }
  const SparseMatrix<Scalar>& matrix() const { return lap_; }

 private:
  SparseMatrix<Scalar> lap_;
};

template <typename Scalar>
GraphLaplacian<Scalar> laplacian_from_adjacency(const GraphAdjacency<Scalar>& adj) {
  const auto& w = adj.weights();
  const Index n = w.rows();
  Vector<Scalar> degree = Vector<Scalar>::Zero(n);
  for (Index c = 0; c < w.outerSize(); ++c)
    for (typename SparseMatrix<Scalar>::InnerIterator it(w, c); it; ++it) degree(c) += it.value();
  std::vector<Eigen::Triplet<Scalar, Index>> trip;
  trip.reserve(static_cast<std::size_t>(w.nonZeros() + n));
  for (Index c = 0; c < w.outerSize(); ++c)
    for (typename SparseMatrix<Scalar>::InnerIterator it(w, c); it; ++it) trip.emplace_back(it.row(), c, -it.value());
  for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, degree(i));
  SparseMatrix<Scalar> lap(n, n);
  lap.setFromTriplets(trip.begin(), trip.end());
  return GraphLaplacian<Scalar>(std::move(lap));
}

/// L = lambda_L * Lap + I, symmetric positive definite for lambda_L >= 0.
template <typename Scalar>
class ShiftedLaplacian {
 public:
  ShiftedLaplacian(GraphLaplacian<Scalar> base, Scalar lambda_L) : base_(std::move(base)), lambda_L_(lambda_L) {
    detail::require(lambda_L_ >= 0, "ShiftedLaplacian: lambda_L must be nonnegative");
  }

  Index nodes() const { return base_.nodes(); }
  Scalar lambda_L() const { return lambda_L_; }
  const GraphLaplacian<Scalar>& base() const { return base_; }

  SparseMatrix<Scalar> matrix() const {
    SparseMatrix<Scalar> eye(nodes(), nodes());
    eye.setIdentity();
    SparseMatrix<Scalar> out = lambda_L_ * base_.matrix() + eye;
    out.makeCompressed();
    return out;
  }

 private:
  GraphLaplacian<Scalar> base_;
  Scalar lambda_L_ = 0;
};

/// (lambda_L * Lap + I) X, using only the sparse Laplacian.
template <typename Scalar, typename Derived>
Matrix<Scalar> shifted_apply(const ShiftedLaplacian<Scalar>& L, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != L.nodes()) detail::fail_arg("shifted_apply: shape mismatch");
  Matrix<Scalar> out = x;
  if (L.lambda_L() != Scalar(0)) out.noalias() += L.lambda_L() * (L.base().matrix() * x);
  return out;
}

/// <F F^T, Lap> = trace(F^T Lap F), without forming F F^T.
template <typename Scalar, typename Derived>
Scalar laplacian_quadratic(const GraphLaplacian<Scalar>& lap, const Eigen::MatrixBase<Derived>& f) {
  if (f.rows() != lap.nodes()) detail::fail_arg("laplacian_quadratic: shape mismatch");
  Matrix<Scalar> lf = lap.matrix() * f;
  return (f.array() * lf.array()).sum();
}

enum class RowDistance { SquaredEuclidean, Euclidean };

/// Dense m x m matrix of distances between the rows of `m`.
template <typename Derived>
Matrix<typename Derived::Scalar> pairwise_distances(const Eigen::MatrixBase<Derived>& m, RowDistance dist) {
  using Scalar = typename Derived::Scalar;
  if (!m.allFinite()) detail::fail_arg("pairwise_distances: non-finite rows");
  const Index n = m.rows();
  Matrix<Scalar> rows_t = m.transpose();
  Matrix<Scalar> z = Matrix<Scalar>::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      Scalar d = (rows_t.col(i) - rows_t.col(j)).squaredNorm();
      if (dist == RowDistance::Euclidean) d = std::sqrt(d);
      z(i, j) = z(j, i) = d;
    }
  return z;
}

/// Median of the strictly positive off-diagonal entries of a distance matrix;
/// 1 if there are none.
template <typename Scalar>
Scalar median_nonzero_distance(const Matrix<Scalar>& z) {
  std::vector<Scalar> vals;
  for (Index j = 0; j < z.cols(); ++j)
    for (Index i = j + 1; i < z.rows(); ++i)
      if (z(i, j) > 0) vals.push_back(z(i, j));
  if (vals.empty()) return Scalar(1);
  auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  Scalar hi = *mid;
  if (vals.size() % 2 == 1) return hi;
  Scalar lo = *std::max_element(vals.begin(), mid);
  return (lo + hi) / 2;
}

/// Gaussian epsilon-graph from a precomputed distance matrix:
/// W_ij = exp(-Z_ij / eps^2) when that value is >= sigma, else 0.
template <typename Scalar>
GraphAdjacency<Scalar> epsilon_graph_from_distances(const Matrix<Scalar>& z, Scalar eps, Scalar sigma) {
  detail::require(eps > 0, "epsilon_graph: eps must be positive");
  detail::require(sigma > 0 && sigma <= 1, "epsilon_graph: sigma must lie in (0, 1]");
  detail::require(z.allFinite(), "epsilon_graph: non-finite distances");
  std::vector<Edge<Scalar>> edges;
  const Scalar inv = Scalar(1) / (eps * eps);
  for (Index j = 0; j < z.cols(); ++j)
    for (Index i = j + 1; i < z.rows(); ++i) {
      Scalar w = std::exp(-z(i, j) * inv);
      if (w >= sigma && w > 0) edges.push_back({j, i, w});
    }
  return GraphAdjacency<Scalar>::from_edges(z.rows(), edges);
}

template <typename Derived>
GraphAdjacency<typename Derived::Scalar> epsilon_graph(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar eps,
                                                       typename Derived::Scalar sigma,
                                                       RowDistance dist = RowDistance::SquaredEuclidean) {
  return epsilon_graph_from_distances(pairwise_distances(m, dist), eps, sigma);
}

/// Smallest threshold sigma whose graph keeps at most density * n^2 nonzero
/// adjacency entries (both orientations counted).
template <typename Scalar>
Scalar sigma_for_density(const Matrix<Scalar>& z, Scalar eps, double density) {
  detail::require(density > 0 && density <= 1, "sigma_for_density: density must lie in (0, 1]");
  const Index n = z.rows();
  std::vector<Scalar> w;
  const Scalar inv = Scalar(1) / (eps * eps);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      Scalar v = std::exp(-z(i, j) * inv);
      if (v > 0) w.push_back(v);
    }
  const auto budget = static_cast<std::size_t>(std::floor(density * static_cast<double>(n) * static_cast<double>(n) / 2));
  if (w.empty()) return Scalar(1);
  std::sort(w.begin(), w.end(), std::greater<Scalar>());
  if (w.size() <= budget) return w.back();
  return std::nextafter(w[budget], std::numeric_limits<Scalar>::infinity());
}

struct EpsilonGraphOptions {
  std::optional<double> eps;    ///< default: sqrt(median nonzero distance)
  std::optional<double> sigma;  ///< default: chosen from `density`
  double density = 0.05;
  RowDistance distance = RowDistance::SquaredEuclidean;
};

template <typename Scalar>
struct EpsilonGraph {
  GraphAdjacency<Scalar> graph;
  Scalar eps = 0;
  Scalar sigma = 0;
};

template <typename Derived>
EpsilonGraph<typename Derived::Scalar> build_epsilon_graph(const Eigen::MatrixBase<Derived>& m,
                                                           const EpsilonGraphOptions& opts) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> z = pairwise_distances(m, opts.distance);
  Scalar eps = opts.eps ? static_cast<Scalar>(*opts.eps) : std::sqrt(median_nonzero_distance(z));
  Scalar sigma = opts.sigma ? static_cast<Scalar>(*opts.sigma) : sigma_for_density(z, eps, opts.density);
  if (sigma > 1) return {GraphAdjacency<Scalar>::empty(m.rows()), eps, sigma};
  return {epsilon_graph_from_distances(z, eps, sigma), eps, sigma};
}

/// Complete graph with W_ij = 1 / (||row_i - row_j|| + delta).
template <typename Derived>
GraphAdjacency<typename Derived::Scalar> inverse_distance_graph(const Eigen::MatrixBase<Derived>& m,
                                                                double delta = 1e-8) {
  using Scalar = typename Derived::Scalar;
  detail::require(delta > 0, "inverse_distance_graph: delta must be positive");
  Matrix<Scalar> z = pairwise_distances(m, RowDistance::Euclidean);
  std::vector<Edge<Scalar>> edges;
  for (Index j = 0; j < z.cols(); ++j)
    for (Index i = j + 1; i < z.rows(); ++i) edges.push_back({j, i, Scalar(1) / (z(i, j) + static_cast<Scalar>(delta))});
  return GraphAdjacency<Scalar>::from_edges(z.rows(), edges);
}

/// Path graph 0 - 1 - ... - (n-1) with unit weights.
template <typename Scalar = double>
GraphAdjacency<Scalar> chain_graph(Index n) {
  detail::require(n >= 2, "chain_graph: need at least two nodes");
  std::vector<Edge<Scalar>> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, Scalar(1)});
  return GraphAdjacency<Scalar>::from_edges(n, edges);
}

/// Node v belongs to community v * c / n.
inline Index community_of(Index v, Index n, Index communities) { return v * communities / n; }

/// Stochastic block model with `communities` contiguous, balanced blocks and
/// unit weights: each pair is joined with probability p_in inside a block and
/// p_out across blocks.
template <typename Scalar = double>
GraphAdjacency<Scalar> community_graph(Index n, Index communities, double p_in, double p_out, std::uint64_t seed) {
  detail::require(n >= 1, "community_graph: need at least one node");
  detail::require(communities >= 1 && communities <= n, "community_graph: invalid community count");
  detail::require(0 <= p_out && p_out <= p_in && p_in <= 1, "community_graph: need 0 <= p_out <= p_in <= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge<Scalar>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double p = community_of(i, n, communities) == community_of(j, n, communities) ? p_in : p_out;
      if (unif(rng) < p) edges.push_back({i, j, Scalar(1)});
    }
  return GraphAdjacency<Scalar>::from_edges(n, edges);
}

template <typename Scalar>
struct TruncatedFactorization {
  Matrix<Scalar> U;
  Vector<Scalar> S;
  Matrix<Scalar> V;

  Matrix<Scalar> reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

/// Best rank-r approximation U diag(S) V^T of a dense matrix (missing
/// entries already zero-filled).
template <typename Derived>
TruncatedFactorization<typename Derived::Scalar> truncated_factorization(const Eigen::MatrixBase<Derived>& m, Index r) {
  using Scalar = typename Derived::Scalar;
  detail::require(r >= 1 && r <= std::min(m.rows(), m.cols()), "truncated_factorization: rank out of range");
  Eigen::BDCSVD<Matrix<Scalar>> svd(m.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
}

}  // namespace grtc
