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

/// @file evaluation.hpp
/// Model variants, solver dispatch, K-fold cross-validation of the
/// regularization weights and the repeated-trial experiment driver.

#pragma once

#include "grtc/datagen.hpp"
#include "grtc/metrics.hpp"
#include "grtc/solvers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grtc {

/// GReg: lambda > 0 and lambda_L > 0. NuclReg: lambda > 0, lambda_L = 0.
/// Unreg: both zero.
enum class ModelVariant { GReg, NuclReg, Unreg };

std::string to_string(ModelVariant v);
/// Accepts "greg", "nuclreg", "unreg" in any letter case.
ModelVariant parse_variant(const std::string& name);

/// Regularization with the same lambda on every mode. Throws
/// std::invalid_argument when the weights violate the variant's constraints;
/// NuclReg ignores lambda_L and Unreg ignores both.
Regularization<double> make_regularization(ModelVariant v, Index order, double lambda, double lambda_L);

enum class SolverKind { AltMinCG, ADMM, AltMinExact };

std::string to_string(SolverKind s);
/// Accepts "altmin-cg", "admm", "altmin-exact".
SolverKind parse_solver(const std::string& name);

struct SolverSettings {
  SolverKind kind = SolverKind::AltMinCG;
  StoppingRule stop;
  CGConfig cg;
  ADMMConfig admm;
};

SolveResult<double> solve(const Problem<double>& problem, const CPFactors<double>& init, const SolverSettings& settings,
                          const SolveOptions<double>& opts = {});

/// Standard normal factors drawn from mt19937_64(seed).
CPFactors<double> random_init(const Shape& shape, Index rank, std::uint64_t seed);

/// Mixes a base seed with stream coordinates (trial, init, purpose) so that
/// every stream is independent and reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

struct CVConfig {
  int folds = 3;
  int n_samples = 20;
  double lo = 1e-4;
  double hi = 1e1;
  // Separate bounds for lambda_L; unset falls back to [lo, hi].
  std::optional<double> lo_L, hi_L;
  std::uint64_t seed = 0;

  double lambda_L_lo() const { return lo_L.value_or(lo); }
  double lambda_L_hi() const { return hi_L.value_or(hi); }

  void validate() const;
};

struct Candidate {
  double lambda = 0;
  double lambda_L = 0;
  bool operator==(const Candidate&) const = default;
};

/// n_samples log-uniform draws of lambda from [lo, hi] and lambda_L from
/// [lambda_L_lo(), lambda_L_hi()]. The
/// lambda sequence depends only on the seed, so NuclReg sees the same lambdas
/// as GReg with lambda_L zeroed. Unreg yields the single candidate (0, 0).
std::vector<Candidate> draw_candidates(const CVConfig& cfg, ModelVariant v);

/// fold[e] in [0, folds) for each of n entries; fold sizes differ by at most one.
std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed);

struct CVRow {
  Candidate candidate;
  std::vector<double> fold_rmse;  // empty when the search was skipped
  double mean_rmse = std::numeric_limits<double>::quiet_NaN();
};

struct CVResult {
  Candidate best;
  std::vector<CVRow> table;
  nlohmann::json to_json() const;
};

/// Scores each candidate by validation RMSE averaged over folds that
/// partition the training entries. Lowest mean wins; ties go to the larger
/// lambda_L, then the larger lambda. A failing or non-finite run scores +inf.
/// A single candidate is returned without being scored.
CVResult cross_validate_candidates(const SparseObservations<double>& train,
                                   const std::vector<GraphLaplacian<double>>& laplacians, ModelVariant variant,
                                   const std::vector<Candidate>& candidates, const CVConfig& cfg,
                                   const SolverSettings& settings, Index rank, std::uint64_t init_seed);

CVResult cross_validate(const SparseObservations<double>& train, const std::vector<GraphLaplacian<double>>& laplacians,
                        ModelVariant variant, const CVConfig& cfg, const SolverSettings& settings, Index rank,
                        std::uint64_t init_seed);

/// Synthetic comparison: n_test data instances (graph, tensor, sampling)
/// times n_init initial points, for every variant and solver. All variants
/// and solvers share the instances and initial points of a given (trial, init).
struct ExperimentSpec {
  Shape shape{std::vector<Index>{100, 30, 30}};
  Index rank = 5;
  Index model_rank = 0;  // 0: same as rank
  GraphRecipe graph;
  double snr_db = 20.0;
  double sampling_rate = 0.05;
  double train_fraction = 0.8;
  double test_fraction = 0.2;
  int n_test = 5;
  int n_init = 10;
  std::uint64_t seed = 0;
  std::vector<ModelVariant> variants{ModelVariant::GReg, ModelVariant::NuclReg, ModelVariant::Unreg};
  std::vector<SolverKind> solvers{SolverKind::AltMinCG, SolverKind::ADMM};
  SolverSettings settings;  // kind is overridden per run
  /// Cross-validate weights per (trial, variant, solver); otherwise use `fixed`.
  bool use_cv = true;
  CVConfig cv;
  std::map<ModelVariant, Candidate> fixed;

  void validate() const;
  Index fit_rank() const { return model_rank > 0 ? model_rank : rank; }
};

struct RunRecord {
  int trial = 0;
  int init = 0;
  ModelVariant variant = ModelVariant::GReg;
  SolverKind solver = SolverKind::AltMinCG;
  Candidate weights;
  double test_re = 0;  // against the noise-free tensor
  double test_rmse = 0;
  double train_re = 0;
  double train_rmse = 0;
  double objective = 0;
  SolverReport report;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<RunRecord> runs;
  struct CVEntry {
    int trial;
    ModelVariant variant;
    SolverKind solver;
    CVResult result;
  };
  std::vector<CVEntry> cv;

  /// Mean test RE over all runs of (variant, solver); optionally one trial.
  double aggregate_test_re(ModelVariant v, SolverKind s, std::optional<int> trial = {}) const;
  double aggregate_test_rmse(ModelVariant v, SolverKind s, std::optional<int> trial = {}) const;
  nlohmann::json to_json() const;
  /// summary.json plus traces/<variant>_<solver>_t<trial>_i<init>.csv.
  void write(const std::filesystem::path& dir, bool force) const;
};

ExperimentReport run_experiment(const ExperimentSpec& spec);

nlohmann::json to_json(const ExperimentSpec& spec);

}  // namespace grtc
