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

/// @file metrics.hpp
/// Recovery errors of a CP model on a set of known entries.

#pragma once

#include "grtc/tensor_core.hpp"

#include <cmath>
#include <numeric>
#include <span>

namespace grtc {

/// ||P(model - truth)||_F together with ||P(truth)||_F on the same index set.
template <typename Scalar>
struct ResidualNorms {
  Scalar residual = 0;
  Scalar truth = 0;
  Index count = 0;
};

template <typename Scalar>
ResidualNorms<Scalar> residual_norms(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& truth) {
  auto pred = cp_predict(factors, truth);
  Scalar res = 0;
  Scalar ref = 0;
  for (Index e = 0; e < truth.size(); ++e) {
    const Scalar t = truth.value(e);
    const Scalar d = pred[static_cast<std::size_t>(e)] - t;
    res += d * d;
    ref += t * t;
  }
  return {std::sqrt(res), std::sqrt(ref), truth.size()};
}

/// ||P(model - truth)||_F / ||P(truth)||_F.
template <typename Scalar>
Scalar relative_error(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& truth) {
  detail::require(!truth.empty(), "relative_error: empty index set");
  auto n = residual_norms(factors, truth);
  if (!(n.truth > 0)) detail::fail_arg("relative_error: truth has zero norm on the index set");
  return n.residual / n.truth;
}

/// ||P(model - truth)||_F / sqrt(|Omega'|).
template <typename Scalar>
Scalar rmse(const CPFactors<Scalar>& factors, const SparseObservations<Scalar>& truth) {
  detail::require(!truth.empty(), "rmse: empty index set");
  auto n = residual_norms(factors, truth);
  return n.residual / std::sqrt(static_cast<Scalar>(n.count));
}

/// Mean of all N_test x N_init scores.
template <typename Scalar>
Scalar aggregate_err(std::span<const Scalar> scores) {
  detail::require(!scores.empty(), "aggregate_err: no scores");
  return std::accumulate(scores.begin(), scores.end(), Scalar(0)) / static_cast<Scalar>(scores.size());
}

template <typename Derived>
typename Derived::Scalar aggregate_err(const Eigen::MatrixBase<Derived>& scores) {
  detail::require(scores.size() > 0, "aggregate_err: no scores");
  return scores.mean();
}

}  // namespace grtc
