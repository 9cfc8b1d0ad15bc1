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

/// @file config.hpp
/// JSON run configuration shared by the command-line tools.
///
/// Every section is optional and every key inside a section is optional;
/// absent keys keep their defaults. Unknown keys anywhere raise ConfigError.
///
///   {
///     "seed": 0,
///     "data":       {"shape": [100, 30, 30], "rank": 5, "snr_db": 20,
///                    "graph": {"kind": "community", "communities": 5,
///                              "p_in": 0.3, "p_out": 0.01}},
///     "sampling":   {"rate": 0.05, "train_fraction": 0.8, "test_fraction": 0.2},
///     "model":      {"variant": "greg", "lambda": 0.01, "lambda_L": 1, "rank": 5},
///     "solver":     {"name": "altmin-cg", "init_seed": 0},
///     "stop":       {"delta_tol": 1e-6, "time_budget": null, "max_outer_iters": 500},
///     "cg":         {"rel_tol": 1e-8, "max_iters": 500},
///     "admm":       {"eta0": 1, "gamma": 1.05, "eta_max": 100, "primal_tol": 1e-5,
///                    "inner_rel_tol": 1e-10, "inner_max_iters": 1000},
///     "cv":         {"folds": 3, "n_samples": 20, "lo": 1e-4, "hi": 10,
///                    "lo_L": null, "hi_L": null, "seed": 0},
///     "experiment": {"n_test": 5, "n_init": 10, "variants": ["greg", "nuclreg", "unreg"],
///                    "solvers": ["altmin-cg", "admm"], "use_cv": true,
///                    "fixed": {"greg": {"lambda": 0.01, "lambda_L": 1}}},
///     "graph_build": {"method": "eps", "mode": 1, "density": 0.05, "eps": null,
///                     "sigma": null, "distance": "squared_euclidean", "rank": null,
///                     "inv_dist_delta": 1e-8},
///     "bench":      {"shape": [200, 200, 200], "rank": 8, "entries": 100000,
///                    "graph_edges": 2000, "repeats": 31, "mode": 1}
///   }
///
/// Modes in configuration files and on the command line are 1-based.

#pragma once

#include "grtc/evaluation.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace grtc {

struct DataConfig {
  std::vector<Index> shape{100, 30, 30};
  Index rank = 5;
  double snr_db = 20.0;
  GraphRecipe graph;
};

struct ModelConfig {
  ModelVariant variant = ModelVariant::GReg;
  double lambda = 0.01;
  double lambda_L = 1.0;
  Index rank = 5;
};

enum class GraphMethod { Eps, Chain, InvDist };

struct GraphBuildConfig {
  GraphMethod method = GraphMethod::Eps;
  Index mode = 1;  // 1-based
  double density = 0.05;
  std::optional<double> eps;
  std::optional<double> sigma;
  RowDistance distance = RowDistance::SquaredEuclidean;
  std::optional<Index> rank;  // truncate the unfolding before measuring distances
  double inv_dist_delta = 1e-8;
};

struct BenchConfig {
  std::vector<Index> shape{200, 200, 200};
  Index rank = 8;
  Index entries = 100000;
  Index graph_edges = 2000;
  int repeats = 31;
  Index mode = 1;  // 1-based
};

struct RunConfig {
  std::uint64_t seed = 0;
  DataConfig data;
  SamplingSpec sampling{0.05, 0, 0.8, 0.2};
  ModelConfig model;
  SolverSettings solver;
  std::uint64_t init_seed = 0;
  CVConfig cv;
  int n_test = 5;
  int n_init = 10;
  std::vector<ModelVariant> variants{ModelVariant::GReg, ModelVariant::NuclReg, ModelVariant::Unreg};
  std::vector<SolverKind> solvers{SolverKind::AltMinCG, SolverKind::ADMM};
  bool use_cv = true;
  std::map<ModelVariant, Candidate> fixed;
  GraphBuildConfig graph_build;
  BenchConfig bench;

  /// Range checks on everything; throws ConfigError.
  void validate() const;
  ExperimentSpec experiment_spec() const;
};

GraphMethod parse_graph_method(const std::string& name);
std::string to_string(GraphMethod m);

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace grtc
