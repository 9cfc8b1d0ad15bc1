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

/// @file bench.hpp
/// Timing of the matrix-free block operator as |Omega| and nnz(L) grow.

#pragma once

#include "grtc/graph_laplacian.hpp"
#include "grtc/subproblem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace grtc {

/// Graph on n nodes with exactly `edges` distinct random unit-weight edges.
GraphAdjacency<double> random_edge_graph(Index n, Index edges, std::uint64_t seed);

/// Median wall time in seconds of `repeats` applications of the block
/// operator of `mode` to a fixed random vector.
double median_apply_seconds(const SubproblemOperator<double>& op, int repeats, std::uint64_t seed);

/// Same for several operators, timed round-robin so that a transient
/// slowdown affects every operator alike.
std::vector<double> median_apply_seconds(const std::vector<const SubproblemOperator<double>*>& ops, int repeats,
                                         std::uint64_t seed);

struct BenchRow {
  std::string label;
  Index entries = 0;
  Index laplacian_nnz = 0;
  double median_s = 0;
};

struct BenchSpec {
  Shape shape{std::vector<Index>{200, 200, 200}};
  Index rank = 8;
  Index entries = 100000;
  Index graph_edges = 2000;
  int repeats = 31;
  Index mode = 0;  // 0-based
  std::uint64_t seed = 0;
};

/// Rows "base", "double_entries" and "double_graph": the base instance, the
/// same shape with twice the observed entries, and twice the graph edges.
std::vector<BenchRow> hvp_scaling_bench(const BenchSpec& spec);

/// Columns: label,entries,laplacian_nnz,median_s
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace grtc
