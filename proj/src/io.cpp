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

#include "grtc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

namespace grtc {
namespace {

namespace fs = std::filesystem;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string where(const fs::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no) + ": ";
}

template <typename T>
T parse_number(std::string_view tok, const fs::path& path, std::size_t line_no) {
  T v{};
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  if (!tok.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw DataError(where(path, line_no) + "cannot parse '" + std::string(tok) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw DataError(where(path, line_no) + "non-finite value");
  }
  return v;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

SparseObservations<double> load_tns(const fs::path& path, const std::optional<Shape>& shape) {
  auto in = open_in(path);
  std::optional<Shape> header;
  std::vector<Index> idx;
  std::vector<double> vals;
  std::vector<std::size_t> line_of;
  std::size_t order = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.front().front() == '#') {
      if (starts_with(line, "# shape") || (toks.size() >= 2 && toks[0] == "#" && toks[1] == "shape")) {
        if (!vals.empty()) throw DataError(where(path, line_no) + "shape header after entries");
        std::vector<Index> dims;
        for (std::size_t t = 2; t < toks.size(); ++t) dims.push_back(parse_number<Index>(toks[t], path, line_no));
        try {
          header = Shape(dims);
        } catch (const std::invalid_argument& e) {
          throw DataError(where(path, line_no) + e.what());
        }
      }
      continue;
    }
    if (toks.size() < 3) throw DataError(where(path, line_no) + "expected at least two indices and a value");
    if (order == 0) order = toks.size() - 1;
    if (toks.size() - 1 != order)
      throw DataError(where(path, line_no) + "expected " + std::to_string(order) + " indices and a value");
    for (std::size_t n = 0; n < order; ++n) {
      const auto one_based = parse_number<Index>(toks[n], path, line_no);
      if (one_based < 1) throw DataError(where(path, line_no) + "indices are 1-based");
      idx.push_back(one_based - 1);
    }
    vals.push_back(parse_number<double>(toks[order], path, line_no));
    line_of.push_back(line_no);
  }
  std::optional<Shape> use = shape ? shape : header;
  if (!use) {
    if (vals.empty()) throw DataError(path.string() + ": no entries and no shape header");
    std::vector<Index> dims(order, 0);
    for (std::size_t e = 0; e < vals.size(); ++e)
      for (std::size_t n = 0; n < order; ++n) dims[n] = std::max(dims[n], idx[e * order + n] + 1);
    use = Shape(dims);
  }
  if (!vals.empty() && static_cast<Index>(order) != use->order())
    throw DataError(path.string() + ": entries have " + std::to_string(order) + " indices but the shape has order " +
                    std::to_string(use->order()));
  const auto k = static_cast<std::size_t>(use->order());
  for (std::size_t e = 0; e < vals.size(); ++e) {
    std::span<const Index> mi(idx.data() + e * k, k);
    if (!use->contains(mi)) throw DataError(where(path, line_of[e]) + "index out of range for shape " + use->to_string());
  }
  return SparseObservations<double>(*use, std::move(idx), std::move(vals));
}

std::string format_tns(const SparseObservations<double>& obs, bool header) {
  std::string out;
  if (header) {
    out += "# shape";
    for (Index m : obs.shape().dims()) out += " " + std::to_string(m);
    out += "\n";
  }
  for (Index e = 0; e < obs.size(); ++e) {
    for (Index n : obs.index(e)) out += std::to_string(n + 1) + " ";
    out += format_double(obs.value(e)) + "\n";
  }
  return out;
}

void save_tns(const fs::path& path, const SparseObservations<double>& obs, bool header) {
  write_file_atomic(path, format_tns(obs, header));
}

GraphAdjacency<double> load_graph(const fs::path& path) {
  auto in = open_in(path);
  std::optional<Index> nodes;
  std::vector<Edge<double>> edges;
  std::vector<std::pair<Index, Index>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.front().front() == '#') {
      if (toks.size() >= 3 && toks[0] == "#" && toks[1] == "nodes") {
        if (!edges.empty()) throw DataError(where(path, line_no) + "node header after edges");
        nodes = parse_number<Index>(toks[2], path, line_no);
        if (*nodes < 1) throw DataError(where(path, line_no) + "node count must be positive");
      }
      continue;
    }
    if (!nodes) throw DataError(where(path, line_no) + "missing '# nodes n' header");
    if (toks.size() != 3) throw DataError(where(path, line_no) + "expected 'i j w'");
    Index i = parse_number<Index>(toks[0], path, line_no);
    Index j = parse_number<Index>(toks[1], path, line_no);
    double w = parse_number<double>(toks[2], path, line_no);
    if (i < 1 || j < 1 || i > *nodes || j > *nodes) throw DataError(where(path, line_no) + "node index out of range");
    if (i == j) throw DataError(where(path, line_no) + "self loop");
    if (w < 0) throw DataError(where(path, line_no) + "negative weight");
    if (i > j) std::swap(i, j);
    seen.emplace_back(i, j);
    edges.push_back({i - 1, j - 1, w});
  }
  if (!nodes) throw DataError(path.string() + ": missing '# nodes n' header");
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw DataError(path.string() + ": edge listed more than once");
  return GraphAdjacency<double>::from_edges(*nodes, edges);
}

std::string format_graph(const GraphAdjacency<double>& graph) {
  std::string out = "# nodes " + std::to_string(graph.nodes()) + "\n";
  for (const auto& e : graph.edges())
    out += std::to_string(e.i + 1) + " " + std::to_string(e.j + 1) + " " + format_double(e.w) + "\n";
  return out;
}

void save_graph(const fs::path& path, const GraphAdjacency<double>& graph) {
  write_file_atomic(path, format_graph(graph));
}

CPFactors<double> load_factors(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  Index order = -1;
  Index rank = -1;
  std::vector<Matrix<double>> mats;
  Index row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "#") {
      if (toks.size() == 6 && toks[1] == "cp" && toks[2] == "order" && toks[4] == "rank") {
        order = parse_number<Index>(toks[3], path, line_no);
        rank = parse_number<Index>(toks[5], path, line_no);
        if (order < 2 || rank < 1) throw DataError(where(path, line_no) + "invalid order or rank");
      } else if (toks.size() == 5 && toks[1] == "mode" && toks[3] == "rows") {
        if (rank < 1) throw DataError(where(path, line_no) + "mode block before '# cp' header");
        if (!mats.empty() && row != mats.back().rows()) throw DataError(where(path, line_no) + "previous mode is short");
        const auto mode = parse_number<Index>(toks[2], path, line_no);
        if (mode != static_cast<Index>(mats.size()) + 1) throw DataError(where(path, line_no) + "modes out of order");
        const auto rows = parse_number<Index>(toks[4], path, line_no);
        if (rows < 1) throw DataError(where(path, line_no) + "mode must have at least one row");
        mats.emplace_back(rows, rank);
        row = 0;
      }
      continue;
    }
    if (mats.empty()) throw DataError(where(path, line_no) + "values before a '# mode' header");
    auto& m = mats.back();
    if (row >= m.rows()) throw DataError(where(path, line_no) + "too many rows for mode " + std::to_string(mats.size()));
    if (static_cast<Index>(toks.size()) != rank)
      throw DataError(where(path, line_no) + "expected " + std::to_string(rank) + " values");
    for (Index c = 0; c < rank; ++c) m(row, c) = parse_number<double>(toks[static_cast<std::size_t>(c)], path, line_no);
    ++row;
  }
  if (order < 0) throw DataError(path.string() + ": missing '# cp order k rank R' header");
  if (static_cast<Index>(mats.size()) != order || (!mats.empty() && row != mats.back().rows()))
    throw DataError(path.string() + ": incomplete factor file");
  return CPFactors<double>(std::move(mats));
}

std::string format_factors(const CPFactors<double>& factors) {
  std::string out =
      "# cp order " + std::to_string(factors.order()) + " rank " + std::to_string(factors.rank()) + "\n";
  for (Index i = 0; i < factors.order(); ++i) {
    const auto& u = factors[i];
    out += "# mode " + std::to_string(i + 1) + " rows " + std::to_string(u.rows()) + "\n";
    for (Index r = 0; r < u.rows(); ++r) {
      for (Index c = 0; c < u.cols(); ++c) {
        if (c) out += " ";
        out += format_double(u(r, c));
      }
      out += "\n";
    }
  }
  return out;
}

void save_factors(const fs::path& path, const CPFactors<double>& factors) {
  write_file_atomic(path, format_factors(factors));
}

Matrix<double> load_matrix(const fs::path& path) {
  auto in = open_in(path);
  std::vector<double> vals;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (cols < 0) cols = static_cast<Index>(toks.size());
    if (static_cast<Index>(toks.size()) != cols)
      throw DataError(where(path, line_no) + "expected " + std::to_string(cols) + " columns");
    for (auto t : toks) vals.push_back(parse_number<double>(t, path, line_no));
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": empty matrix");
  Matrix<double> m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = vals[static_cast<std::size_t>(r * cols + c)];
  return m;
}

SparseObservations<double> load_triples(const fs::path& path, Index time_bins, std::optional<Index> users,
                                        std::optional<Index> items) {
  if (time_bins < 1) throw DataError("load_triples: time_bins must be positive");
  struct Rating {
    Index user, item;
    double ts, value;
    std::size_t line;
  };
  auto in = open_in(path);
  std::vector<Rating> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    if (toks.size() != 4) throw DataError(where(path, line_no) + "expected 'user item timestamp rating'");
    Rating r{parse_number<Index>(toks[0], path, line_no), parse_number<Index>(toks[1], path, line_no),
             parse_number<double>(toks[2], path, line_no), parse_number<double>(toks[3], path, line_no), line_no};
    if (r.user < 1 || r.item < 1) throw DataError(where(path, line_no) + "ids are 1-based");
    if ((users && r.user > *users) || (items && r.item > *items))
      throw DataError(where(path, line_no) + "id out of range");
    rows.push_back(r);
  }
  if (rows.empty()) throw DataError(path.string() + ": no ratings");
  Index nu = users.value_or(0);
  Index ni = items.value_or(0);
  double lo = rows.front().ts;
  double hi = lo;
  for (const auto& r : rows) {
    if (!users) nu = std::max(nu, r.user);
    if (!items) ni = std::max(ni, r.item);
    lo = std::min(lo, r.ts);
    hi = std::max(hi, r.ts);
  }
  const double width = (hi - lo) / static_cast<double>(time_bins);
  // (user, item, bin) -> (timestamp, line, rating); later timestamps win, ties go to the later line.
  std::map<std::tuple<Index, Index, Index>, std::tuple<double, std::size_t, double>> cells;
  for (const auto& r : rows) {
    Index bin = width > 0 ? static_cast<Index>(std::floor((r.ts - lo) / width)) : 0;
    bin = std::clamp<Index>(bin, 0, time_bins - 1);
    auto key = std::make_tuple(r.user - 1, r.item - 1, bin);
    auto val = std::make_tuple(r.ts, r.line, r.value);
    auto it = cells.find(key);
    if (it == cells.end())
      cells.emplace(key, val);
    else if (std::tie(std::get<0>(val), std::get<1>(val)) > std::tie(std::get<0>(it->second), std::get<1>(it->second)))
      it->second = val;
  }
  std::vector<Index> idx;
  std::vector<double> vals;
  for (const auto& [key, val] : cells) {
    idx.push_back(std::get<0>(key));
    idx.push_back(std::get<1>(key));
    idx.push_back(std::get<2>(key));
    vals.push_back(std::get<2>(val));
  }
  return SparseObservations<double>(Shape({nu, ni, time_bins}), std::move(idx), std::move(vals));
}

}  // namespace grtc
