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

/// @file tensor_core.hpp
/// Tensor shapes, sparse observation sets, CP factors and the index algebra
/// tying tensor entries to rows and columns of mode-i unfoldings.
///
/// All indices in this header are 0-based. The mode-i unfolding places entry
/// (l_0, ..., l_{k-1}) at row l_i and column sum_{n != i} l_n * I_n where
/// I_n is the product of the dimensions m_j with j < n, j != i. Lower modes
/// therefore vary fastest along a column, which is the row order of the
/// Khatri-Rao product U_{k-1} (.) ... (.) U_{i+1} (.) U_{i-1} (.) ... (.) U_0.

#pragma once

#include "grtc/common.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <type_traits>
#include <vector>

namespace grtc {

class Shape {
 public:
  Shape() = default;

  explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
    detail::require(dims_.size() >= 2, "Shape: tensor order must be at least 2");
    numel_ = 1;
    for (Index m : dims_) {
      detail::require(m >= 1, "Shape: every dimension must be positive");
      if (numel_ > std::numeric_limits<Index>::max() / m)
        detail::fail_arg("Shape: number of entries overflows the index type");
      numel_ *= m;
    }
  }

  Index order() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  const std::vector<Index>& dims() const { return dims_; }
  Index numel() const { return numel_; }

  /// Number of columns of the mode-`mode` unfolding.
  Index unfolded_cols(Index mode) const { return numel_ / dim(mode); }

  bool contains(std::span<const Index> idx) const {
    if (static_cast<Index>(idx.size()) != order()) return false;
    for (std::size_t n = 0; n < dims_.size(); ++n)
      if (idx[n] < 0 || idx[n] >= dims_[n]) return false;
    return true;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t n = 0; n < dims_.size(); ++n) {
      if (n) s += ",";
      s += std::to_string(dims_[n]);
    }
    return s + ")";
  }

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<Index> dims_;
  Index numel_ = 0;
};

/// Position of a tensor entry inside the mode-`mode` unfolding.
struct UnfoldedIndex {
  Index row = 0;
  Index col = 0;
  friend bool operator==(const UnfoldedIndex&, const UnfoldedIndex&) = default;
};

inline UnfoldedIndex mat_index(const Shape& shape, Index mode, std::span<const Index> idx) {
  if (mode < 0 || mode >= shape.order()) throw std::out_of_range("mat_index: mode out of range");
  if (!shape.contains(idx)) throw std::out_of_range("mat_index: multi-index out of bounds");
  Index col = 0;
  Index stride = 1;
  for (Index n = 0; n < shape.order(); ++n) {
    if (n == mode) continue;
    col += idx[static_cast<std::size_t>(n)] * stride;
    stride *= shape.dim(n);
  }
  return {idx[static_cast<std::size_t>(mode)], col};
}

/// Inverse of mat_index.
inline std::vector<Index> fold_index(const Shape& shape, Index mode, UnfoldedIndex at) {
  if (mode < 0 || mode >= shape.order()) throw std::out_of_range("fold_index: mode out of range");
  if (at.row < 0 || at.row >= shape.dim(mode) || at.col < 0 || at.col >= shape.unfolded_cols(mode))
    throw std::out_of_range("fold_index: unfolded index out of bounds");
  std::vector<Index> idx(static_cast<std::size_t>(shape.order()));
  Index rest = at.col;
  for (Index n = 0; n < shape.order(); ++n) {
    if (n == mode) continue;
    idx[static_cast<std::size_t>(n)] = rest % shape.dim(n);
    rest /= shape.dim(n);
  }
  idx[static_cast<std::size_t>(mode)] = at.row;
  return idx;
}

/// Column-major linear offset (mode 0 fastest); equals row + m_0 * col of
/// the mode-0 unfolding.
inline Index linear_index(const Shape& shape, std::span<const Index> idx) {
  if (!shape.contains(idx)) throw std::out_of_range("linear_index: multi-index out of bounds");
  Index lin = 0;
  for (Index n = shape.order() - 1; n >= 0; --n) lin = lin * shape.dim(n) + idx[static_cast<std::size_t>(n)];
  return lin;
}

inline std::vector<Index> multi_index(const Shape& shape, Index lin) {
  if (lin < 0 || lin >= shape.numel()) throw std::out_of_range("multi_index: offset out of range");
  std::vector<Index> idx(static_cast<std::size_t>(shape.order()));
  for (Index n = 0; n < shape.order(); ++n) {
    idx[static_cast<std::size_t>(n)] = lin % shape.dim(n);
    lin /= shape.dim(n);
  }
  return idx;
}

/// Observed entries of one unfolding, grouped by row (CSR layout).
/// `entry[p]` is the canonical entry id and `col[p]` its unfolded column,
/// for p in [row_ptr[s], row_ptr[s+1]).
struct ModeGrouping {
  Index mode = 0;
  std::vector<Index> row_ptr;
  std::vector<Index> entry;
  std::vector<Index> col;

  Index rows() const { return static_cast<Index>(row_ptr.size()) - 1; }
  Index row_size(Index s) const {
    return row_ptr[static_cast<std::size_t>(s) + 1] - row_ptr[static_cast<std::size_t>(s)];
  }
};

/// Revealed entries of a tensor in canonical COO form: lexicographically
/// sorted, in bounds, no duplicates.
template <typename Scalar>
class SparseObservations {
 public:
  SparseObservations() = default;

  /// `indices` holds size() consecutive k-tuples. Entries are sorted into
  /// canonical order; out-of-range or repeated indices raise DataError.
  SparseObservations(Shape shape, std::vector<Index> indices, std::vector<Scalar> values)
      : shape_(std::move(shape)) {
    const auto k = static_cast<std::size_t>(shape_.order());
    if (k == 0) throw DataError("SparseObservations: empty shape");
    if (indices.size() != values.size() * k)
      throw DataError("SparseObservations: index/value count mismatch");
    const std::size_t n = values.size();
    for (std::size_t e = 0; e < n; ++e) {
      std::span<const Index> idx(indices.data() + e * k, k);
      if (!shape_.contains(idx))
        throw DataError("SparseObservations: entry " + std::to_string(e) + " out of bounds for shape " +
                        shape_.to_string());
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto tuple_less = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(indices.begin() + a * k, indices.begin() + (a + 1) * k,
                                          indices.begin() + b * k, indices.begin() + (b + 1) * k);
    };
    if (!std::is_sorted(perm.begin(), perm.end(), tuple_less)) std::sort(perm.begin(), perm.end(), tuple_less);
    indices_.resize(indices.size());
    values_.resize(n);
    for (std::size_t e = 0; e < n; ++e) {
      std::copy_n(indices.begin() + perm[e] * k, k, indices_.begin() + e * k);
      values_[e] = values[perm[e]];
      if (e > 0 && std::equal(indices_.begin() + (e - 1) * k, indices_.begin() + e * k, indices_.begin() + e * k))
        throw DataError("SparseObservations: duplicate multi-index");
    }
    cache_ = std::make_shared<GroupingCache>(shape_.order());
  }

  static SparseObservations from_linear(const Shape& shape, std::span<const Index> offsets,
                                        std::span<const Scalar> values) {
    if (offsets.size() != values.size()) throw DataError("SparseObservations: offset/value count mismatch");
    std::vector<Index> idx;
    idx.reserve(offsets.size() * static_cast<std::size_t>(shape.order()));
    for (Index lin : offsets) {
      if (lin < 0 || lin >= shape.numel()) throw DataError("SparseObservations: offset out of range");
      auto mi = multi_index(shape, lin);
      idx.insert(idx.end(), mi.begin(), mi.end());
    }
    return SparseObservations(shape, std::move(idx), std::vector<Scalar>(values.begin(), values.end()));
  }

  const Shape& shape() const { return shape_; }
  Index order() const { return shape_.order(); }
  Index size() const { return static_cast<Index>(values_.size()); }
  bool empty() const { return values_.empty(); }

  std::span<const Index> index(Index e) const {
    const auto k = static_cast<std::size_t>(shape_.order());
    return {indices_.data() + static_cast<std::size_t>(e) * k, k};
  }
  Scalar value(Index e) const { return values_[static_cast<std::size_t>(e)]; }
  std::span<const Scalar> values() const { return values_; }
  std::span<const Index> flat_indices() const { return indices_; }

  /// Same index set, new values (shares the cached groupings).
  SparseObservations with_values(std::vector<Scalar> values) const {
    if (values.size() != values_.size()) throw DataError("with_values: value count mismatch");
    SparseObservations out;
    out.shape_ = shape_;
    out.indices_ = indices_;
    out.values_ = std::move(values);
    out.cache_ = cache_;
    return out;
  }

  /// Entries with the given canonical ids.
  SparseObservations subset(std::span<const Index> ids) const {
    const auto k = static_cast<std::size_t>(shape_.order());
    std::vector<Index> idx;
    std::vector<Scalar> vals;
    idx.reserve(ids.size() * k);
    vals.reserve(ids.size());
    for (Index e : ids) {
      auto mi = index(e);
      idx.insert(idx.end(), mi.begin(), mi.end());
      vals.push_back(value(e));
    }
    return SparseObservations(shape_, std::move(idx), std::move(vals));
  }

  /// Row grouping of the mode-`mode` unfolding; built on first use.
  const ModeGrouping& grouping(Index mode) const {
    if (mode < 0 || mode >= shape_.order()) throw std::out_of_range("grouping: mode out of range");
    auto m = static_cast<std::size_t>(mode);
    std::call_once(cache_->flags[m], [&] { cache_->groups[m] = build_grouping(mode); });
    return cache_->groups[m];
  }

  friend bool operator==(const SparseObservations& a, const SparseObservations& b) {
    return a.shape_ == b.shape_ && a.indices_ == b.indices_ && a.values_ == b.values_;
  }

 private:
  struct GroupingCache {
    explicit GroupingCache(Index k)
        : flags(new std::once_flag[static_cast<std::size_t>(k)]), groups(static_cast<std::size_t>(k)) {}
    std::unique_ptr<std::once_flag[]> flags;
    std::vector<ModeGrouping> groups;
  };

  ModeGrouping build_grouping(Index mode) const {
    ModeGrouping g;
    g.mode = mode;
    const Index rows = shape_.dim(mode);
    g.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (Index e = 0; e < size(); ++e) ++g.row_ptr[static_cast<std::size_t>(index(e)[mode]) + 1];
    std::partial_sum(g.row_ptr.begin(), g.row_ptr.end(), g.row_ptr.begin());
    g.entry.resize(values_.size());
    g.col.resize(values_.size());
    std::vector<Index> fill(g.row_ptr.begin(), g.row_ptr.end() - 1);
    for (Index e = 0; e < size(); ++e) {
      auto at = mat_index(shape_, mode, index(e));
      auto p = static_cast<std::size_t>(fill[static_cast<std::size_t>(at.row)]++);
      g.entry[p] = e;
      g.col[p] = at.col;
    }
    return g;
  }

  Shape shape_;
  std::vector<Index> indices_;
  std::vector<Scalar> values_;
  std::shared_ptr<GroupingCache> cache_;
};

/// Observation set Omega^(i) of the mode-i unfolding, grouped by row.
template <typename Scalar>
const ModeGrouping& unfold_observations(const SparseObservations<Scalar>& obs, Index mode) {
  return obs.grouping(mode);
}

/// The k factor matrices of a CP model; factor i is m_i x R.
template <typename Scalar>
class CPFactors {
 public:
  CPFactors() = default;

  explicit CPFactors(std::vector<Matrix<Scalar>> factors) : factors_(std::move(factors)) {
    detail::require(factors_.size() >= 2, "CPFactors: need at least two factors");
    const Index r = factors_.front().cols();
    detail::require(r >= 1, "CPFactors: rank must be positive");
    for (const auto& u : factors_) {
      detail::require(u.cols() == r, "CPFactors: factors must share the column count");
      detail::require(u.rows() >= 1, "CPFactors: empty factor");
    }
  }

  static CPFactors zeros(const Shape& shape, Index rank) {
    std::vector<Matrix<Scalar>> f;
    for (Index m : shape.dims()) f.push_back(Matrix<Scalar>::Zero(m, rank));
    return CPFactors(std::move(f));
  }

  /// Entries i.i.d. standard normal.
  template <typename Rng>
  static CPFactors random_normal(const Shape& shape, Index rank, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Matrix<Scalar>> f;
    for (Index m : shape.dims()) {
      Matrix<Scalar> u(m, rank);
      for (Index c = 0; c < rank; ++c)
        for (Index r = 0; r < m; ++r) u(r, c) = static_cast<Scalar>(normal(rng));
      f.push_back(std::move(u));
    }
    return CPFactors(std::move(f));
  }

  Index order() const { return static_cast<Index>(factors_.size()); }
  Index rank() const { return factors_.empty() ? 0 : factors_.front().cols(); }

  Shape shape() const {
    std::vector<Index> dims;
    for (const auto& u : factors_) dims.push_back(u.rows());
    return Shape(std::move(dims));
  }

  const Matrix<Scalar>& operator[](Index i) const { return factors_.at(static_cast<std::size_t>(i)); }
  const std::vector<Matrix<Scalar>>& factors() const { return factors_; }

  void set_factor(Index i, Matrix<Scalar> u) {
    auto& slot = factors_.at(static_cast<std::size_t>(i));
    detail::require(u.rows() == slot.rows() && u.cols() == slot.cols(), "CPFactors: factor size mismatch");
    slot = std::move(u);
  }

  bool matches(const Shape& shape) const {
    if (order() != shape.order()) return false;
    for (Index i = 0; i < order(); ++i)
      if ((*this)[i].rows() != shape.dim(i)) return false;
    return true;
  }

 private:
  std::vector<Matrix<Scalar>> factors_;
};

template <typename DerivedU, typename DerivedV>
Vector<typename DerivedU::Scalar> kronecker(const Eigen::MatrixBase<DerivedU>& u,
                                            const Eigen::MatrixBase<DerivedV>& v) {
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(DerivedU)
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(DerivedV)
  const Index n = v.size();
  Vector<typename DerivedU::Scalar> out(u.size() * n);
  for (Index a = 0; a < u.size(); ++a) out.segment(a * n, n) = u.coeff(a) * v;
  return out;
}

/// mats[0] (.) mats[1] (.) ... : column r is the Kronecker product of the
/// r-th columns, left operand outermost.
template <typename Scalar>
Matrix<Scalar> khatri_rao(const std::vector<Matrix<Scalar>>& mats) {
  detail::require(!mats.empty(), "khatri_rao: no operands");
  const Index r = mats.front().cols();
  for (const auto& m : mats) detail::require(m.cols() == r, "khatri_rao: mismatched column counts");
  Matrix<Scalar> out = mats.front();
  for (std::size_t t = 1; t < mats.size(); ++t) {
    const auto& next = mats[t];
    Matrix<Scalar> prod(out.rows() * next.rows(), r);
    for (Index c = 0; c < r; ++c)
      for (Index a = 0; a < out.rows(); ++a)
        prod.col(c).segment(a * next.rows(), next.rows()) = out(a, c) * next.col(c);
    out = std::move(prod);
  }
  return out;
}

/// Khatri-Rao product of all factors except `excluded`, highest mode first.
template <typename Scalar>
Matrix<Scalar> khatri_rao_excluding(const CPFactors<Scalar>& factors, std::span<const Index> excluded) {
  std::vector<Matrix<Scalar>> mats;
  for (Index n = factors.order() - 1; n >= 0; --n)
    if (std::find(excluded.begin(), excluded.end(), n) == excluded.end()) mats.push_back(factors[n]);
  return khatri_rao(mats);
}

template <typename Scalar>
Matrix<Scalar> khatri_rao_excluding(const CPFactors<Scalar>& factors, Index excluded) {
  const Index ex[] = {excluded};
  return khatri_rao_excluding(factors, std::span<const Index>(ex));
}

/// Squared column norms of the Khatri-Rao product of the factors not in
/// `excluded`, without forming it: entry r is prod_j ||U_j(:, r)||^2.
template <typename Scalar>
Vector<Scalar> khatri_rao_col_norms_sq(const CPFactors<Scalar>& factors, std::span<const Index> excluded) {
  Vector<Scalar> out = Vector<Scalar>::Ones(factors.rank());
  bool any = false;
  for (Index n = 0; n < factors.order(); ++n) {
    if (std::find(excluded.begin(), excluded.end(), n) != excluded.end()) continue;
    out.array() *= factors[n].colwise().squaredNorm().transpose().array();
    any = true;
  }
  if (!any) detail::fail_arg("khatri_rao_col_norms_sq: empty factor subset");
  return out;
}

/// Row `col` of the Khatri-Rao product excluding `mode`, i.e. the product of
/// the factor rows selected by the multi-index `idx` over all n != mode.
template <typename Scalar>
void khatri_rao_row(const CPFactors<Scalar>& factors, Index mode, std::span<const Index> idx,
                    Eigen::Ref<Vector<std::type_identity_t<Scalar>>> out) {
  out.setOnes();
  for (Index n = 0; n < factors.order(); ++n) {
    if (n == mode) continue;
    out.array() *= factors[n].row(idx[static_cast<std::size_t>(n)]).transpose().array();
  }
}

template <typename Scalar>
Scalar cp_reconstruct_at(const CPFactors<Scalar>& factors, std::span<const Index> idx) {
  if (!factors.shape().contains(idx)) throw std::out_of_range("cp_reconstruct_at: index out of bounds");
  Scalar total = 0;
  for (Index r = 0; r < factors.rank(); ++r) {
    Scalar p = 1;
    for (Index n = 0; n < factors.order(); ++n) p *= factors[n](idx[static_cast<std::size_t>(n)], r);
    total += p;
  }
  return total;
}

/// Model predictions at every observed index.
template <typename Scalar>
std::vector<Scalar> cp_predict(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& obs) {
  if (!factors.matches(obs.shape())) detail::fail_arg("cp_predict: shape mismatch");
  std::vector<Scalar> out(static_cast<std::size_t>(obs.size()));
  const Index k = factors.order();
  const Index rank = factors.rank();
  for (Index e = 0; e < obs.size(); ++e) {
    auto idx = obs.index(e);
    Scalar total = 0;
    for (Index r = 0; r < rank; ++r) {
      Scalar p = 1;
      for (Index n = 0; n < k; ++n) p *= factors[n](idx[static_cast<std::size_t>(n)], r);
      total += p;
    }
    out[static_cast<std::size_t>(e)] = total;
  }
  return out;
}

/// P_Omega(T - [[U]]) on the observed index set.
template <typename Scalar>
SparseObservations<Scalar> residual_on_omega(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& obs) {
  if (!factors.matches(obs.shape())) detail::fail_arg("residual_on_omega: shape mismatch");
  auto pred = cp_predict(factors, obs);
  for (Index e = 0; e < obs.size(); ++e) pred[static_cast<std::size_t>(e)] = obs.value(e) - pred[static_cast<std::size_t>(e)];
  return obs.with_values(std::move(pred));
}

/// Small dense tensor in column-major order (mode 0 fastest). Used for
/// synthetic ground truth and verification; not for production-size data.
template <typename Scalar>
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape) : shape_(std::move(shape)), data_(Vector<Scalar>::Zero(shape_.numel())) {}
  DenseTensor(Shape shape, Vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    detail::require(data_.size() == shape_.numel(), "DenseTensor: data size mismatch");
  }

  static DenseTensor from_cp(const CPFactors<Scalar>& factors) {
    Shape shape = factors.shape();
    Matrix<Scalar> unf0 = factors[0] * khatri_rao_excluding(factors, Index{0}).transpose();
    return DenseTensor(shape, Eigen::Map<const Vector<Scalar>>(unf0.data(), unf0.size()));
  }

  const Shape& shape() const { return shape_; }
  const Vector<Scalar>& data() const { return data_; }
  Vector<Scalar>& data() { return data_; }

  Scalar operator()(std::span<const Index> idx) const { return data_(linear_index(shape_, idx)); }
  Scalar at_linear(Index lin) const { return data_(lin); }

  Matrix<Scalar> unfold(Index mode) const {
    Matrix<Scalar> out(shape_.dim(mode), shape_.unfolded_cols(mode));
    for (Index lin = 0; lin < shape_.numel(); ++lin) {
      auto at = mat_index(shape_, mode, multi_index(shape_, lin));
      out(at.row, at.col) = data_(lin);
    }
    return out;
  }

 private:
  Shape shape_;
  Vector<Scalar> data_;
};

}  // namespace grtc
