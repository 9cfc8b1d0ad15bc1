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

/// @file subproblem.hpp
/// The graph-regularized CP completion objective
///
///   f(U) = 1/2 ||P_Omega(T - [[U_0, ..., U_{k-1}]])||_F^2
///        + sum_i lambda_i/2 <U_i U_i^T, L_i>
///        + sum_i lambda_i/2 ||KR_{j != i} U_j||_F^2,      L_i = lambda_L Lap_i + I,
///
/// and the quadratic it reduces to in a single factor. With x = vec(U_i^T)
/// (the R entries of row 0 first, then row 1, ...), the block objective is
/// 1/2 x^T M x - vec(Q^T)^T x + const where
///
///   M = A + lambda_i L_i (x) I_R + I_{m_i} (x) C,
///   A = blockdiag_s( sum_{l in Omega_s} d_l d_l^T ),
///   C = diag( sum_{j != i} lambda_j prod_{n != i,j} ||U_n(:, r)||^2 ),
///   Q = (P_Omega T)_(i) KR_{j != i} U_j,
///
/// and d_l is the row of the Khatri-Rao product matching unfolded column l.

#pragma once

#include "grtc/graph_laplacian.hpp"
#include "grtc/tensor_core.hpp"

#include <vector>

namespace grtc {

/// Per-mode weights lambda_i and the Laplacian weight lambda_L.
template <typename Scalar>
struct Regularization {
  std::vector<Scalar> lambda;
  Scalar lambda_L = 0;

  static Regularization uniform(Index order, Scalar lambda, Scalar lambda_L) {
    return {std::vector<Scalar>(static_cast<std::size_t>(order), lambda), lambda_L};
  }

  Scalar at(Index i) const { return lambda.at(static_cast<std::size_t>(i)); }
};

/// Training data, one Laplacian per mode (zero for modes without a graph)
/// and the regularization weights.
template <typename Scalar>
struct Problem {
  SparseObservations<Scalar> obs;
  std::vector<GraphLaplacian<Scalar>> laplacians;
  Regularization<Scalar> reg;

  Problem() = default;

  /// Missing trailing Laplacians and empty (0-node) entries become zero
  /// Laplacians of the right size.
  Problem(SparseObservations<Scalar> o, std::vector<GraphLaplacian<Scalar>> laps, Regularization<Scalar> r)
      : obs(std::move(o)), laplacians(std::move(laps)), reg(std::move(r)) {
    const Index k = obs.order();
    detail::require(static_cast<Index>(laplacians.size()) <= k, "Problem: more Laplacians than modes");
    laplacians.resize(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      auto& lap = laplacians[static_cast<std::size_t>(i)];
      if (lap.nodes() == 0) lap = GraphLaplacian<Scalar>::zero(obs.shape().dim(i));
      detail::require(lap.nodes() == obs.shape().dim(i), "Problem: Laplacian size does not match its mode");
    }
    detail::require(static_cast<Index>(reg.lambda.size()) == k, "Problem: need one lambda per mode");
    for (Scalar l : reg.lambda) detail::require(l >= 0, "Problem: lambda must be nonnegative");
    detail::require(reg.lambda_L >= 0, "Problem: lambda_L must be nonnegative");
  }

  Index order() const { return obs.order(); }
  ShiftedLaplacian<Scalar> shifted(Index i) const {
    return ShiftedLaplacian<Scalar>(laplacians.at(static_cast<std::size_t>(i)), reg.lambda_L);
  }
};

/// Diagonal of C^(i) as a vector of length R. For k = 2 the product over
/// n != i, j is empty and taken as 1.
template <typename Scalar>
Vector<Scalar> build_C(const CPFactors<Scalar>& factors, Index mode, const std::vector<Scalar>& lambdas) {
  detail::require(static_cast<Index>(lambdas.size()) == factors.order(), "build_C: need one lambda per mode");
  Vector<Scalar> c = Vector<Scalar>::Zero(factors.rank());
  for (Index j = 0; j < factors.order(); ++j) {
    if (j == mode) continue;
    const Scalar lj = lambdas[static_cast<std::size_t>(j)];
    if (lj == Scalar(0)) continue;
    if (factors.order() == 2) {
      c.array() += lj;
    } else {
      const Index ex[] = {mode, j};
      c += lj * khatri_rao_col_norms_sq(factors, std::span<const Index>(ex));
    }
  }
  return c;
}

/// Q^(i) = (P_Omega T)_(i) * KR_{j != i} U_j, one pass over the observations.
template <typename Scalar>
Matrix<Scalar> build_Q(const SparseObservations<Scalar>& obs, const CPFactors<Scalar>& factors, Index mode) {
  if (!factors.matches(obs.shape())) detail::fail_arg("build_Q: shape mismatch");
  Matrix<Scalar> q = Matrix<Scalar>::Zero(factors[mode].rows(), factors.rank());
  Vector<Scalar> d(factors.rank());
  for (Index e = 0; e < obs.size(); ++e) {
    auto idx = obs.index(e);
    const auto at = mat_index(obs.shape(), mode, idx);
    khatri_rao_row(factors, mode, idx, d);
    q.row(at.row) += obs.value(e) * d.transpose();
  }
  return q;
}

/// Matrix-free M^(i) for one mode at fixed values of the other factors.
/// Holds the Khatri-Rao rows d_l for the observed columns only.
template <typename Scalar>
class SubproblemOperator {
 public:
  SubproblemOperator(const SparseObservations<Scalar>& obs, const CPFactors<Scalar>& factors, Index mode,
                     const ShiftedLaplacian<Scalar>& laplacian, const std::vector<Scalar>& lambdas, Scalar ridge = 0)
      : mode_(mode),
        rows_(factors[mode].rows()),
        rank_(factors.rank()),
        lambda_(lambdas.at(static_cast<std::size_t>(mode))),
        ridge_(ridge),
        laplacian_(laplacian.matrix()),
        c_(build_C(factors, mode, lambdas)) {
    if (!factors.matches(obs.shape())) detail::fail_arg("SubproblemOperator: shape mismatch");
    if (laplacian.nodes() != rows_) detail::fail_arg("SubproblemOperator: Laplacian size mismatch");
    const ModeGrouping& g = obs.grouping(mode);
    row_ptr_ = g.row_ptr;
    const Index nnz = static_cast<Index>(g.entry.size());
    d_.resize(rank_, nnz);
    values_.resize(nnz);
    for (Index p = 0; p < nnz; ++p) {
      const Index e = g.entry[static_cast<std::size_t>(p)];
      khatri_rao_row(factors, mode, obs.index(e), d_.col(p));
      values_(p) = obs.value(e);
    }
  }

  Index mode() const { return mode_; }
  Index rows() const { return rows_; }
  Index rank() const { return rank_; }
  Index size() const { return rows_ * rank_; }
  Scalar lambda() const { return lambda_; }
  Scalar ridge() const { return ridge_; }
  const Vector<Scalar>& C() const { return c_; }
  const SparseMatrix<Scalar>& shifted_laplacian() const { return laplacian_; }

  /// N = A x in unvec form: column j of the R x m_i input is row j of U_i.
  template <typename Derived>
  Matrix<Scalar> apply_A(const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != rank_ || x.cols() != rows_) detail::fail_arg("apply_A: expected an R x m_i matrix");
    Matrix<Scalar> out = Matrix<Scalar>::Zero(rank_, rows_);
    accumulate_A(x, out);
    return out;
  }

  /// M x for x = vec(U_i^T).
  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    if (x.size() != size()) detail::fail_arg("SubproblemOperator::apply: length mismatch");
    Eigen::Map<const Matrix<Scalar>> xm(x.data(), rank_, rows_);
    Vector<Scalar> out(size());
    Eigen::Map<Matrix<Scalar>> om(out.data(), rank_, rows_);
    om.noalias() = c_.asDiagonal() * xm;
    if (ridge_ != Scalar(0)) om += ridge_ * xm;
    if (lambda_ != Scalar(0)) om.noalias() += lambda_ * (laplacian_ * xm.transpose()).transpose();
    accumulate_A(xm, om);
    return out;
  }

  Vector<Scalar> operator()(const Vector<Scalar>& x) const { return apply(x); }

  /// Q^(i), m_i x R.
  Matrix<Scalar> rhs() const {
    Matrix<Scalar> qt = Matrix<Scalar>::Zero(rank_, rows_);
    for (Index j = 0; j < rows_; ++j)
      for (Index p = row_begin(j); p < row_begin(j + 1); ++p) qt.col(j) += values_(p) * d_.col(p);
    return qt.transpose();
  }

  /// vec(Q^T), the right-hand side in the x = vec(U_i^T) layout.
  Vector<Scalar> rhs_vector() const {
    Matrix<Scalar> qt = rhs().transpose();
    return Eigen::Map<const Vector<Scalar>>(qt.data(), qt.size());
  }

  /// Diagonal block A_j = sum_{l in Omega_j} d_l d_l^T (R x R).
  Matrix<Scalar> block(Index j) const {
    Matrix<Scalar> a = Matrix<Scalar>::Zero(rank_, rank_);
    for (Index p = row_begin(j); p < row_begin(j + 1); ++p) a.noalias() += d_.col(p) * d_.col(p).transpose();
    return a;
  }

  /// Row j of Q^(i) as a column vector.
  Vector<Scalar> rhs_row(Index j) const {
    Vector<Scalar> q = Vector<Scalar>::Zero(rank_);
    for (Index p = row_begin(j); p < row_begin(j + 1); ++p) q += values_(p) * d_.col(p);
    return q;
  }

  /// Dense M^(i); only sensible for small m_i R.
  Matrix<Scalar> assemble_dense() const {
    const Index n = size();
    Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
    for (Index j = 0; j < rows_; ++j) {
      m.block(j * rank_, j * rank_, rank_, rank_) += block(j);
      m.block(j * rank_, j * rank_, rank_, rank_).diagonal() += c_;
      m.block(j * rank_, j * rank_, rank_, rank_).diagonal().array() += ridge_;
    }
    if (lambda_ != Scalar(0))
      for (Index c = 0; c < laplacian_.outerSize(); ++c)
        for (typename SparseMatrix<Scalar>::InnerIterator it(laplacian_, c); it; ++it)
          m.block(it.row() * rank_, c * rank_, rank_, rank_).diagonal().array() += lambda_ * it.value();
    return m;
  }

 private:
  Index row_begin(Index j) const { return row_ptr_[static_cast<std::size_t>(j)]; }

  template <typename In, typename Out>
  void accumulate_A(const In& x, Out& out) const {
    for (Index j = 0; j < rows_; ++j) {
      const Index end = row_begin(j + 1);
      for (Index p = row_begin(j); p < end; ++p) {
        const Scalar s = d_.col(p).dot(x.col(j));
        out.col(j) += s * d_.col(p);
      }
    }
  }

  Index mode_;
  Index rows_;
  Index rank_;
  Scalar lambda_;
  Scalar ridge_;
  SparseMatrix<Scalar> laplacian_;
  Vector<Scalar> c_;
  std::vector<Index> row_ptr_;
  Matrix<Scalar> d_;
  Vector<Scalar> values_;
};

/// Dense R x R system of one row update in the split (ADMM) scheme:
/// (A_j + eta I + C) u = Q_j + eta b + y.
template <typename Scalar>
struct RowSystem {
  Matrix<Scalar> matrix;
  Vector<Scalar> rhs;
};

template <typename Scalar, typename DerivedB, typename DerivedY>
RowSystem<Scalar> build_row_system(const SubproblemOperator<Scalar>& op, Index row, Scalar eta,
                                   const Eigen::MatrixBase<DerivedB>& b_row, const Eigen::MatrixBase<DerivedY>& y_row) {
  detail::require(eta > 0, "build_row_system: eta must be positive");
  detail::require(row >= 0 && row < op.rows(), "build_row_system: row out of range");
  detail::require(b_row.size() == op.rank() && y_row.size() == op.rank(), "build_row_system: row length mismatch");
  RowSystem<Scalar> sys{op.block(row), op.rhs_row(row)};
  sys.matrix.diagonal() += op.C();
  sys.matrix.diagonal().array() += eta;
  sys.rhs += eta * b_row.derived().transpose().reshaped() + y_row.derived().transpose().reshaped();
  return sys;
}

template <typename Scalar>
Scalar objective_value(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& obs,
                       const std::vector<GraphLaplacian<Scalar>>& laplacians, const Regularization<Scalar>& reg) {
  if (!factors.matches(obs.shape())) detail::fail_arg("objective_value: shape mismatch");
  const Index k = factors.order();
  detail::require(static_cast<Index>(laplacians.size()) == k, "objective_value: need one Laplacian per mode");
  detail::require(static_cast<Index>(reg.lambda.size()) == k, "objective_value: need one lambda per mode");
  auto pred = cp_predict(factors, obs);
  Scalar fit = 0;
  for (Index e = 0; e < obs.size(); ++e) {
    const Scalar r = obs.value(e) - pred[static_cast<std::size_t>(e)];
    fit += r * r;
  }
  Scalar total = fit / 2;
  for (Index i = 0; i < k; ++i) {
    const Scalar li = reg.at(i);
    if (li == Scalar(0)) continue;
    Scalar graph = factors[i].squaredNorm();
    if (reg.lambda_L != Scalar(0))
      graph += reg.lambda_L * laplacian_quadratic(laplacians[static_cast<std::size_t>(i)], factors[i]);
    const Index ex[] = {i};
    const Scalar kr = khatri_rao_col_norms_sq(factors, std::span<const Index>(ex)).sum();
    total += li / 2 * (graph + kr);
  }
  return total;
}

template <typename Scalar>
Scalar objective_value(const Problem<Scalar>& p, const CPFactors<Scalar>& factors) {
  return objective_value(factors, p.obs, p.laplacians, p.reg);
}

/// Gradient of f, one m_i x R block per mode: unvec(M^(i) x - vec(Q^(i)T)).
template <typename Scalar>
std::vector<Matrix<Scalar>> objective_gradient(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& obs,
                                               const std::vector<GraphLaplacian<Scalar>>& laplacians,
                                               const Regularization<Scalar>& reg) {
  std::vector<Matrix<Scalar>> grad;
  for (Index i = 0; i < factors.order(); ++i) {
    ShiftedLaplacian<Scalar> L(laplacians.at(static_cast<std::size_t>(i)), reg.lambda_L);
    SubproblemOperator<Scalar> op(obs, factors, i, L, reg.lambda);
    Matrix<Scalar> ut = factors[i].transpose();
    Vector<Scalar> x = Eigen::Map<const Vector<Scalar>>(ut.data(), ut.size());
    Vector<Scalar> g = op.apply(x) - op.rhs_vector();
    grad.push_back(Eigen::Map<const Matrix<Scalar>>(g.data(), op.rank(), op.rows()).transpose());
  }
  return grad;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> objective_gradient(const Problem<Scalar>& p, const CPFactors<Scalar>& factors) {
  return objective_gradient(factors, p.obs, p.laplacians, p.reg);
}

template <typename Scalar>
Scalar gradient_norm(const std::vector<Matrix<Scalar>>& grad) {
  Scalar s = 0;
  for (const auto& g : grad) s += g.squaredNorm();
  return std::sqrt(s);
}

/// vec(U^T) and its inverse.
template <typename Scalar>
Vector<Scalar> vec_rows(const Matrix<Scalar>& u) {
  Matrix<Scalar> ut = u.transpose();
  return Eigen::Map<const Vector<Scalar>>(ut.data(), ut.size());
}

template <typename Scalar>
Matrix<Scalar> unvec_rows(const Vector<Scalar>& x, Index rows, Index rank) {
  detail::require(x.size() == rows * rank, "unvec_rows: length mismatch");
  return Eigen::Map<const Matrix<Scalar>>(x.data(), rank, rows).transpose();
}

}  // namespace grtc
