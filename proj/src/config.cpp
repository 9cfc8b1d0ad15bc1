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

#include "grtc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

namespace grtc {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (auto* v = find(key)) out = convert<T>(*v, key);
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    if (auto* v = find(key)) out = v->is_null() ? std::nullopt : std::optional<T>(convert<T>(*v, key));
  }

  /// null maps to +inf.
  void get_budget(const char* key, double& out) {
    if (auto* v = find(key)) out = v->is_null() ? std::numeric_limits<double>::infinity() : convert<double>(*v, key);
  }

  void sub(const char* key, const std::function<void(Section&)>& fn) {
    if (auto* v = find(key)) {
      Section s(*v, path_ + key + ".");
      fn(s);
      s.finish();
    }
  }

  const json* find(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + path_ + k + "'");
  }

  std::string where() const { return "config" + (path_.empty() ? std::string() : " '" + path_ + "'") + ": "; }

 private:
  template <typename T>
  T convert(const json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) throw ConfigError("");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config key '" + path_ + key + "' has the wrong type: " + v.dump());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

GraphRecipe::Kind parse_graph_kind(const std::string& s) {
  if (s == "community") return GraphRecipe::Kind::Community;
  if (s == "chain") return GraphRecipe::Kind::Chain;
  throw ConfigError("unknown graph kind '" + s + "' (expected community or chain)");
}

RowDistance parse_distance(const std::string& s) {
  if (s == "squared_euclidean") return RowDistance::SquaredEuclidean;
  if (s == "euclidean") return RowDistance::Euclidean;
  throw ConfigError("unknown distance '" + s + "' (expected squared_euclidean or euclidean)");
}

void parse_weights(Section& s, Candidate& c) {
  s.get("lambda", c.lambda);
  s.get("lambda_L", c.lambda_L);
}

}  // namespace

GraphMethod parse_graph_method(const std::string& name) {
  if (name == "eps") return GraphMethod::Eps;
  if (name == "chain") return GraphMethod::Chain;
  if (name == "inv-dist") return GraphMethod::InvDist;
  throw ConfigError("unknown graph method '" + name + "' (expected eps, chain or inv-dist)");
}

std::string to_string(GraphMethod m) {
  switch (m) {
    case GraphMethod::Eps:
      return "eps";
    case GraphMethod::Chain:
      return "chain";
    case GraphMethod::InvDist:
      return "inv-dist";
  }
  return "unknown";
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.sub("data", [&](Section& s) {
    s.get("shape", c.data.shape);
    s.get("rank", c.data.rank);
    s.get("snr_db", c.data.snr_db);
    s.sub("graph", [&](Section& g) {
      std::string kind = "community";
      g.get("kind", kind);
      c.data.graph.kind = parse_graph_kind(kind);
      g.get("communities", c.data.graph.communities);
      g.get("p_in", c.data.graph.p_in);
      g.get("p_out", c.data.graph.p_out);
    });
  });
  root.sub("sampling", [&](Section& s) {
    s.get("rate", c.sampling.rate);
    s.get("train_fraction", c.sampling.train_fraction);
    s.get("test_fraction", c.sampling.test_fraction);
  });
  root.sub("model", [&](Section& s) {
    std::string v = to_string(c.model.variant);
    s.get("variant", v);
    c.model.variant = parse_variant(v);
    s.get("lambda", c.model.lambda);
    s.get("lambda_L", c.model.lambda_L);
    s.get("rank", c.model.rank);
  });
  root.sub("solver", [&](Section& s) {
    std::string name = to_string(c.solver.kind);
    s.get("name", name);
    c.solver.kind = parse_solver(name);
    s.get("init_seed", c.init_seed);
  });
  root.sub("stop", [&](Section& s) {
    s.get("delta_tol", c.solver.stop.delta_tol);
    s.get_budget("time_budget", c.solver.stop.time_budget);
    s.get("max_outer_iters", c.solver.stop.max_outer_iters);
  });
  root.sub("cg", [&](Section& s) {
    s.get("rel_tol", c.solver.cg.rel_tol);
    s.get("max_iters", c.solver.cg.max_iters);
  });
  root.sub("admm", [&](Section& s) {
    s.get("eta0", c.solver.admm.eta0);
    s.get("gamma", c.solver.admm.gamma);
    s.get_budget("eta_max", c.solver.admm.eta_max);
    s.get("primal_tol", c.solver.admm.primal_tol);
    s.get("inner_rel_tol", c.solver.admm.inner.rel_tol);
    s.get("inner_max_iters", c.solver.admm.inner.max_iters);
  });
  root.sub("cv", [&](Section& s) {
    s.get("folds", c.cv.folds);
    s.get("n_samples", c.cv.n_samples);
    s.get("lo", c.cv.lo);
    s.get("hi", c.cv.hi);
    s.get("lo_L", c.cv.lo_L);
    s.get("hi_L", c.cv.hi_L);
    s.get("seed", c.cv.seed);
  });
  root.sub("experiment", [&](Section& s) {
    s.get("n_test", c.n_test);
    s.get("n_init", c.n_init);
    if (s.find("variants")) {
      std::vector<std::string> names;
      s.get("variants", names);
      c.variants.clear();
      for (const auto& n : names) c.variants.push_back(parse_variant(n));
    }
    if (s.find("solvers")) {
      std::vector<std::string> names;
      s.get("solvers", names);
      c.solvers.clear();
      for (const auto& n : names) c.solvers.push_back(parse_solver(n));
    }
    s.get("use_cv", c.use_cv);
    s.sub("fixed", [&](Section& f) {
      for (const char* name : {"greg", "nuclreg", "unreg"})
        f.sub(name, [&](Section& w) { parse_weights(w, c.fixed[parse_variant(name)]); });
    });
  });
  root.sub("graph_build", [&](Section& s) {
    std::string method = to_string(c.graph_build.method);
    s.get("method", method);
    c.graph_build.method = parse_graph_method(method);
    s.get("mode", c.graph_build.mode);
    s.get("density", c.graph_build.density);
    s.get("eps", c.graph_build.eps);
    s.get("sigma", c.graph_build.sigma);
    std::string dist = "squared_euclidean";
    s.get("distance", dist);
    c.graph_build.distance = parse_distance(dist);
    s.get("rank", c.graph_build.rank);
    s.get("inv_dist_delta", c.graph_build.inv_dist_delta);
  });
  root.sub("bench", [&](Section& s) {
    s.get("shape", c.bench.shape);
    s.get("rank", c.bench.rank);
    s.get("entries", c.bench.entries);
    s.get("graph_edges", c.bench.graph_edges);
    s.get("repeats", c.bench.repeats);
    s.get("mode", c.bench.mode);
  });
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

void RunConfig::validate() const {
  try {
    Shape s(data.shape);
    if (s.order() < 2) throw ConfigError("data.shape needs at least two modes");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("data.shape: ") + e.what());
  }
  if (data.rank < 1) throw ConfigError("data.rank must be positive");
  if (std::isnan(data.snr_db)) throw ConfigError("data.snr_db must be a number");
  if (data.graph.kind == GraphRecipe::Kind::Community) {
    if (data.graph.communities < 1 || data.graph.communities > data.shape.front())
      throw ConfigError("data.graph.communities must lie in [1, shape[0]]");
    if (!(0 <= data.graph.p_out && data.graph.p_out <= data.graph.p_in && data.graph.p_in <= 1))
      throw ConfigError("data.graph needs 0 <= p_out <= p_in <= 1");
  }
  if (!(sampling.rate > 0 && sampling.rate <= 1)) throw ConfigError("sampling.rate must lie in (0, 1]");
  if (!(sampling.train_fraction >= 0 && sampling.test_fraction >= 0 &&
        sampling.train_fraction + sampling.test_fraction <= 1 + 1e-12))
    throw ConfigError("sampling fractions must be nonnegative and sum to at most 1");
  if (model.rank < 1) throw ConfigError("model.rank must be positive");
  if (!(model.lambda >= 0 && model.lambda_L >= 0)) throw ConfigError("model weights must be nonnegative");
  solver.stop.validate();
  solver.cg.validate();
  solver.admm.validate();
  cv.validate();
  if (n_test < 1 || n_init < 1) throw ConfigError("experiment.n_test and n_init must be at least 1");
  if (variants.empty() || solvers.empty()) throw ConfigError("experiment needs at least one variant and solver");
  if (graph_build.mode < 1) throw ConfigError("graph_build.mode is 1-based");
  if (!(graph_build.density > 0 && graph_build.density <= 1)) throw ConfigError("graph_build.density must lie in (0, 1]");
  if (graph_build.eps && !(*graph_build.eps > 0)) throw ConfigError("graph_build.eps must be positive");
  if (graph_build.sigma && !(*graph_build.sigma > 0 && *graph_build.sigma <= 1))
    throw ConfigError("graph_build.sigma must lie in (0, 1]");
  if (graph_build.rank && *graph_build.rank < 1) throw ConfigError("graph_build.rank must be positive");
  if (!(graph_build.inv_dist_delta > 0)) throw ConfigError("graph_build.inv_dist_delta must be positive");
  if (bench.shape.size() < 2) throw ConfigError("bench.shape needs at least two modes");
  if (bench.rank < 1 || bench.entries < 1 || bench.graph_edges < 0 || bench.repeats < 1)
    throw ConfigError("bench sizes must be positive");
  if (bench.mode < 1 || bench.mode > static_cast<Index>(bench.shape.size()))
    throw ConfigError("bench.mode out of range");
}

ExperimentSpec RunConfig::experiment_spec() const {
  ExperimentSpec e;
  e.shape = Shape(data.shape);
  e.rank = data.rank;
  e.model_rank = model.rank;
  e.graph = data.graph;
  e.snr_db = data.snr_db;
  e.sampling_rate = sampling.rate;
  e.train_fraction = sampling.train_fraction;
  e.test_fraction = sampling.test_fraction;
  e.n_test = n_test;
  e.n_init = n_init;
  e.seed = seed;
  e.variants = variants;
  e.solvers = solvers;
  e.settings = solver;
  e.use_cv = use_cv;
  e.cv = cv;
  e.fixed = fixed;
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return e;
}

}  // namespace grtc
