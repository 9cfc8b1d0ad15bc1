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

/// @file io.hpp
/// Text formats. Every index written or read here is 1-based.
///
///   .tns     optional header "# shape m1 ... mk", then one entry per line:
///            k indices and a value, single-space separated.
///   edges    header "# nodes n", then "i j w" per undirected edge, i < j.
///   factors  header "# cp order k rank R", then per mode a line
///            "# mode i rows m_i" followed by m_i rows of R values.
///   triples  "user item timestamp rating", whitespace separated.
///   matrix   one row per line, whitespace separated; '#' lines ignored.

#pragma once

#include "grtc/graph_laplacian.hpp"
#include "grtc/tensor_core.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace grtc {

/// Reads a .tns file. Without a header line the shape is taken as the
/// largest index seen in each mode; `shape` overrides both.
SparseObservations<double> load_tns(const std::filesystem::path& path, const std::optional<Shape>& shape = {});
std::string format_tns(const SparseObservations<double>& obs, bool header = true);
void save_tns(const std::filesystem::path& path, const SparseObservations<double>& obs, bool header = true);

GraphAdjacency<double> load_graph(const std::filesystem::path& path);
std::string format_graph(const GraphAdjacency<double>& graph);
void save_graph(const std::filesystem::path& path, const GraphAdjacency<double>& graph);

CPFactors<double> load_factors(const std::filesystem::path& path);
std::string format_factors(const CPFactors<double>& factors);
void save_factors(const std::filesystem::path& path, const CPFactors<double>& factors);

/// Ratings stream binned into a users x items x time_bins tensor. Bins split
/// [min_ts, max_ts] into equal widths; a repeated (user, item, bin) keeps the
/// rating with the latest timestamp. `users`/`items` default to the largest
/// ids seen.
SparseObservations<double> load_triples(const std::filesystem::path& path, Index time_bins,
                                        std::optional<Index> users = {}, std::optional<Index> items = {});

/// Dense matrix; all rows must have the same length.
Matrix<double> load_matrix(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

}  // namespace grtc
