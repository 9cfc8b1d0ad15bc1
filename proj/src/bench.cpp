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

#include "grtc/bench.hpp"

#include "grtc/datagen.hpp"
#include "grtc/io.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>

namespace grtc {

GraphAdjacency<double> random_edge_graph(Index n, Index edges, std::uint64_t seed) {
  detail::require(n >= 1, "random_edge_graph: need at least one node");
  detail::require(edges >= 0 && edges <= n * (n - 1) / 2, "random_edge_graph: edge count out of range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> node(0, n - 1);
  std::set<std::pair<Index, Index>> seen;
  std::vector<Edge<double>> out;
  while (static_cast<Index>(out.size()) < edges) {
    Index i = node(rng);
    Index j = node(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (seen.insert({i, j}).second) out.push_back({i, j, 1.0});
  }
  return GraphAdjacency<double>::from_edges(n, out);
}

double median_apply_seconds(const SubproblemOperator<double>& op, int repeats, std::uint64_t seed) {
  return median_apply_seconds({&op}, repeats, seed).front();
}

std::vector<double> median_apply_seconds(const std::vector<const SubproblemOperator<double>*>& ops, int repeats,
                                         std::uint64_t seed) {
  detail::require(repeats >= 1, "median_apply_seconds: repeats must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vector<double>> xs;
  double sink = 0;
  for (const auto* op : ops) {
    Vector<double> x(op->size());
    for (Index e = 0; e < x.size(); ++e) x(e) = normal(rng);
    sink += op->apply(x).sum();  // warm-up
    xs.push_back(std::move(x));
  }
  std::vector<std::vector<double>> t(ops.size());
  for (int r = 0; r < repeats; ++r)
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const auto start = std::chrono::steady_clock::now();
      Vector<double> y = ops[k]->apply(xs[k]);
      t[k].push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      sink += y(0);
    }
  if (!std::isfinite(sink)) throw SolverError("median_apply_seconds: non-finite product");
  std::vector<double> out;
  for (auto& tk : t) {
    std::nth_element(tk.begin(), tk.begin() + static_cast<std::ptrdiff_t>(tk.size() / 2), tk.end());
    out.push_back(tk[tk.size() / 2]);
  }
  return out;
}

std::vector<BenchRow> hvp_scaling_bench(const BenchSpec& spec) {
  detail::require(spec.mode >= 0 && spec.mode < spec.shape.order(), "hvp_scaling_bench: mode out of range");
  detail::require(2 * spec.entries <= spec.shape.numel(), "hvp_scaling_bench: too many entries for the shape");
  const Index m = spec.shape.dim(spec.mode);
  std::mt19937_64 rng(spec.seed);
  auto factors = CPFactors<double>::random_normal(spec.shape, spec.rank, rng);
  std::vector<double> lambdas(static_cast<std::size_t>(spec.shape.order()), 0.1);

  auto make_obs = [&](Index count, std::uint64_t seed) {
    const double rate = static_cast<double>(count) / static_cast<double>(spec.shape.numel());
    auto om = sample_omega(spec.shape, {rate, seed, 1.0, 0.0});
    std::vector<double> vals(om.train.size(), 1.0);
    return SparseObservations<double>::from_linear(spec.shape, om.train, vals);
  };
  auto lap = [&](Index edges) { return laplacian_from_adjacency(random_edge_graph(m, edges, spec.seed + 7)); };
  auto base = make_obs(spec.entries, spec.seed + 1);
  auto doubled = make_obs(2 * spec.entries, spec.seed + 2);
  auto lap_base = lap(spec.graph_edges);
  auto lap_doubled = lap(std::min(2 * spec.graph_edges, m * (m - 1) / 2));
  const SubproblemOperator<double> op_base(base, factors, spec.mode, ShiftedLaplacian<double>(lap_base, 1.0), lambdas);
  const SubproblemOperator<double> op_entries(doubled, factors, spec.mode, ShiftedLaplacian<double>(lap_base, 1.0),
                                              lambdas);
  const SubproblemOperator<double> op_graph(base, factors, spec.mode, ShiftedLaplacian<double>(lap_doubled, 1.0),
                                            lambdas);
  auto t = median_apply_seconds({&op_base, &op_entries, &op_graph}, spec.repeats, spec.seed);
  return {BenchRow{"base", base.size(), lap_base.matrix().nonZeros(), t[0]},
          BenchRow{"double_entries", doubled.size(), lap_base.matrix().nonZeros(), t[1]},
          BenchRow{"double_graph", base.size(), lap_doubled.matrix().nonZeros(), t[2]}};
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "label,entries,laplacian_nnz,median_s\n";
  for (const auto& r : rows)
    out += r.label + "," + std::to_string(r.entries) + "," + std::to_string(r.laplacian_nnz) + "," +
           format_double(r.median_s) + "\n";
  return out;
}

}  // namespace grtc
